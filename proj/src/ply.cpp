#include "vista/detail/ply.hpp"

#include <cstring>
#include <sstream>

#include "vista/error.hpp"
#include "vista/png_io.hpp"

namespace vista::detail {

namespace {

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::kChar:
    case PlyType::kUChar: return 1;
    case PlyType::kShort:
    case PlyType::kUShort: return 2;
    case PlyType::kInt:
    case PlyType::kUInt:
    case PlyType::kFloat: return 4;
    case PlyType::kDouble: return 8;
  }
  return 0;
}

bool parse_type(const std::string& s, PlyType& t) {
  static const std::map<std::string, PlyType> kNames = {
      {"char", PlyType::kChar},     {"int8", PlyType::kChar},     {"uchar", PlyType::kUChar},
      {"uint8", PlyType::kUChar},   {"short", PlyType::kShort},   {"int16", PlyType::kShort},
      {"ushort", PlyType::kUShort}, {"uint16", PlyType::kUShort}, {"int", PlyType::kInt},
      {"int32", PlyType::kInt},     {"uint", PlyType::kUInt},     {"uint32", PlyType::kUInt},
      {"float", PlyType::kFloat},   {"float32", PlyType::kFloat}, {"double", PlyType::kDouble},
      {"float64", PlyType::kDouble}};
  const auto it = kNames.find(s);
  if (it == kNames.end()) return false;
  t = it->second;
  return true;
}

const char* type_name(PlyType t) {
  switch (t) {
    case PlyType::kChar: return "char";
    case PlyType::kUChar: return "uchar";
    case PlyType::kShort: return "short";
    case PlyType::kUShort: return "ushort";
    case PlyType::kInt: return "int";
    case PlyType::kUInt: return "uint";
    case PlyType::kFloat: return "float";
    case PlyType::kDouble: return "double";
  }
  return "";
}

template <typename T>
double load(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double decode(PlyType t, const std::uint8_t* p) {
  switch (t) {
    case PlyType::kChar: return load<std::int8_t>(p);
    case PlyType::kUChar: return load<std::uint8_t>(p);
    case PlyType::kShort: return load<std::int16_t>(p);
    case PlyType::kUShort: return load<std::uint16_t>(p);
    case PlyType::kInt: return load<std::int32_t>(p);
    case PlyType::kUInt: return load<std::uint32_t>(p);
    case PlyType::kFloat: return load<float>(p);
    case PlyType::kDouble: return load<double>(p);
  }
  return 0.0;
}

template <typename T>
void store(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

void encode(PlyType t, double v, std::vector<std::uint8_t>& out) {
  switch (t) {
    case PlyType::kChar: store(out, static_cast<std::int8_t>(v)); break;
    case PlyType::kUChar: store(out, static_cast<std::uint8_t>(v)); break;
    case PlyType::kShort: store(out, static_cast<std::int16_t>(v)); break;
    case PlyType::kUShort: store(out, static_cast<std::uint16_t>(v)); break;
    case PlyType::kInt: store(out, static_cast<std::int32_t>(v)); break;
    case PlyType::kUInt: store(out, static_cast<std::uint32_t>(v)); break;
    case PlyType::kFloat: store(out, static_cast<float>(v)); break;
    case PlyType::kDouble: store(out, v); break;
  }
}

}  // namespace

int PlyTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < properties.size(); ++i) {
    if (properties[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

PlyTable parse_ply(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  const std::string marker = "end_header\n";
  const std::string head(bytes.begin(), bytes.begin() + std::min<std::size_t>(bytes.size(), 1 << 16));
  const std::size_t end = head.find(marker);
  if (head.rfind("ply\n", 0) != 0 || end == std::string::npos) {
    fail(ErrorKind::kCorruptHeader, name + ": missing ply magic or end_header");
  }
  PlyTable table;
  std::istringstream in(head.substr(0, end));
  std::string line;
  bool in_vertex = false, seen_vertex = false, seen_format = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "ply" || key.empty()) continue;
    if (key == "format") {
      std::string fmt, ver;
      ls >> fmt >> ver;
      if (fmt != "binary_little_endian") fail(ErrorKind::kCorruptHeader, name + ": format " + fmt);
      seen_format = true;
    } else if (key == "comment") {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
      table.comments.push_back(rest);
    } else if (key == "element") {
      std::string el;
      long long count = -1;
      ls >> el >> count;
      if (el == "vertex") {
        if (count < 0 || seen_vertex) fail(ErrorKind::kCorruptHeader, name + ": bad vertex element");
        table.rows = static_cast<std::size_t>(count);
        in_vertex = seen_vertex = true;
      } else {
        if (count != 0) fail(ErrorKind::kCorruptHeader, name + ": unsupported element " + el);
        in_vertex = false;
      }
    } else if (key == "property") {
      std::string ty, prop;
      ls >> ty >> prop;
      PlyType t;
      if (ty == "list" || !parse_type(ty, t) || prop.empty()) {
        fail(ErrorKind::kCorruptHeader, name + ": unsupported property '" + line + "'");
      }
      if (in_vertex) table.properties.push_back({prop, t});
    } else if (key != "obj_info") {
      fail(ErrorKind::kCorruptHeader, name + ": unknown header line '" + line + "'");
    }
  }
  if (!seen_format || !seen_vertex) fail(ErrorKind::kCorruptHeader, name + ": incomplete header");

  std::size_t row_size = 0;
  for (const auto& p : table.properties) row_size += type_size(p.type);
  const std::size_t body = end + marker.size();
  if (table.rows > 0 && row_size == 0) fail(ErrorKind::kCorruptHeader, name + ": no properties");
  if (row_size > 0 && (bytes.size() - body) / row_size < table.rows) {
    fail(ErrorKind::kCorruptHeader, name + ": truncated body");
  }
  table.values.resize(table.rows * table.properties.size());
  const std::uint8_t* p = bytes.data() + body;
  std::size_t k = 0;
  for (std::size_t r = 0; r < table.rows; ++r) {
    for (const auto& prop : table.properties) {
      table.values[k++] = decode(prop.type, p);
      p += type_size(prop.type);
    }
  }
  return table;
}

PlyTable read_ply(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const VistaError&) {
    fail(ErrorKind::kCorruptHeader, path.string() + ": unreadable");
  }
  return parse_ply(bytes, path.string());
}

void write_ply(const std::filesystem::path& path, const PlyTable& table) {
  std::ostringstream h;
  h << "ply\nformat binary_little_endian 1.0\n";
  for (const auto& c : table.comments) h << "comment " << c << "\n";
  h << "element vertex " << table.rows << "\n";
  for (const auto& p : table.properties) h << "property " << type_name(p.type) << " " << p.name << "\n";
  h << "end_header\n";
  const std::string header = h.str();
  std::vector<std::uint8_t> out(header.begin(), header.end());
  std::size_t k = 0;
  for (std::size_t r = 0; r < table.rows; ++r) {
    for (const auto& p : table.properties) encode(p.type, table.values[k++], out);
  }
  write_file_bytes(path, out);
}

}  // namespace vista::detail
