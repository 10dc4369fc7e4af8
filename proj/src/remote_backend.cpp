#include "vista/remote_backend.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "vista/error.hpp"
#include "vista/png_io.hpp"

namespace vista {

namespace {

std::string as_string(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

std::string number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

httplib::Result post_with_retry(const std::string& endpoint, const std::string& path,
                                const httplib::MultipartFormDataItems& items,
                                const RemoteOptions& options) {
  int delay = options.backoff_ms;
  std::string last_error;
  for (int attempt = 1; attempt <= options.attempts; ++attempt) {
    httplib::Client client(endpoint);
    client.set_connection_timeout(options.connect_timeout_s);
    client.set_read_timeout(options.timeout_s);
    client.set_write_timeout(options.timeout_s);
    auto res = client.Post(path, items);
    if (res && res->status != 503) return res;
    last_error = res ? "503 " + res->body : httplib::to_string(res.error());
    spdlog::warn("{}{} attempt {}/{} failed: {}", endpoint, path, attempt, options.attempts, last_error);
    if (attempt < options.attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay *= 2;
    }
  }
  fail(ErrorKind::kNetworkError, endpoint + path + ": " + last_error);
}

[[noreturn]] void protocol_failure(const std::string& path, const httplib::Response& res) {
  fail(ErrorKind::kProtocolError, path + " returned " + std::to_string(res.status) + ": " + res.body);
}

std::vector<std::uint8_t> mask_png(const MaskMap& m) {
  // value = round(255 * M')
  return encode_png_gray8(m);
}

}  // namespace

RemoteBackend::RemoteBackend(std::string endpoint, RemoteOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
}

std::string RemoteBackend::learn_concept(const std::vector<ImageBuffer>& images,
                                         const std::vector<MaskMap>& fused_masks) {
  if (images.size() != fused_masks.size()) fail(ErrorKind::kCountMismatch, "images vs masks");
  httplib::MultipartFormDataItems items;
  for (std::size_t i = 0; i < images.size(); ++i) {
    require_same_size(images[i], fused_masks[i], "concept mask");
    const std::string name = std::to_string(i) + ".png";
    items.push_back({"images[]", as_string(encode_png_rgb8(images[i])), name, "image/png"});
    items.push_back({"fused_masks[]", as_string(mask_png(fused_masks[i])), name, "image/png"});
  }
  items.push_back({"steps", std::to_string(options_.learn_steps), "", ""});
  items.push_back({"token_count", std::to_string(options_.token_count), "", ""});
  const auto res = post_with_retry(endpoint_, "/concept/learn", items, options_);
  if (res->status != 200) protocol_failure("/concept/learn", *res);
  try {
    const auto doc = nlohmann::json::parse(res->body);
    const std::string id = doc.at("concept_id").get<std::string>();
    if (id.empty()) fail(ErrorKind::kProtocolError, "/concept/learn returned an empty concept_id");
    return id;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kProtocolError, std::string("/concept/learn: bad JSON: ") + e.what());
  }
}

ImageBuffer RemoteBackend::inpaint(const InpaintRequest& request) {
  require_same_size(request.image, request.fused_mask, "inpaint request");
  httplib::MultipartFormDataItems items = {
      {"image", as_string(encode_png_rgb8(request.image)), "image.png", "image/png"},
      {"fused_mask", as_string(mask_png(request.fused_mask)), "mask.png", "image/png"},
      {"concept_id", request.concept_id, "", ""},
      {"strength", number(request.strength), "", ""},
      {"steps", std::to_string(request.steps), "", ""},
      {"seed", std::to_string(request.seed), "", ""},
  };
  const auto res = post_with_retry(endpoint_, "/inpaint", items, options_);
  if (res->status != 200) protocol_failure("/inpaint", *res);
  ImageBuffer out;
  try {
    out = decode_png_rgb({res->body.begin(), res->body.end()}, "/inpaint response");
  } catch (const VistaError& e) {
    fail(ErrorKind::kProtocolError, e.what());
  }
  if (!same_size(out, request.image)) {
    fail(ErrorKind::kContractViolation,
         "response is " + std::to_string(out.width) + "x" + std::to_string(out.height) + ", expected " +
             std::to_string(request.image.width) + "x" + std::to_string(request.image.height));
  }
  // The request was sent as 8-bit, so compare against the quantised input.
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    if (to_byte(request.fused_mask.data[p]) != 0) continue;
    for (int c = 0; c < 3; ++c) {
      const double sent = to_byte(request.image.data[p * 3 + c]) / 255.0;
      if (std::abs(out.data[p * 3 + c] - sent) > options_.drift_tolerance + 1e-9) {
        fail(ErrorKind::kContractViolation, "unmasked pixel " + std::to_string(p) + " drifted");
      }
    }
  }
  return out;
}

}  // namespace vista
