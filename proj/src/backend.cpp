#include "vista/backend.hpp"

#include <algorithm>
#include <future>

#include "vista/error.hpp"

namespace vista {

std::string IdentityBackend::learn_concept(const std::vector<ImageBuffer>& images,
                                           const std::vector<MaskMap>& fused_masks) {
  if (images.size() != fused_masks.size()) fail(ErrorKind::kCountMismatch, "images vs masks");
  return "identity";
}

ImageBuffer IdentityBackend::inpaint(const InpaintRequest& request) { return request.image; }

OracleBackend::OracleBackend(std::map<int, ImageBuffer> references,
                             std::shared_ptr<const Codec> codec, NoiseSchedule schedule,
                             RepaintOptions options)
    : references_(std::move(references)),
      codec_(std::move(codec)),
      schedule_(std::move(schedule)),
      options_(options) {}

std::string OracleBackend::learn_concept(const std::vector<ImageBuffer>& images,
                                         const std::vector<MaskMap>& fused_masks) {
  if (images.size() != fused_masks.size()) fail(ErrorKind::kCountMismatch, "images vs masks");
  return "oracle";
}

ImageBuffer OracleBackend::inpaint(const InpaintRequest& request) {
  const auto it = references_.find(request.view_id);
  if (it == references_.end()) {
    fail(ErrorKind::kBackendFailure, "no reference for view " + std::to_string(request.view_id));
  }
  const OracleDenoiser denoiser(codec_->encode(it->second), schedule_);
  std::mt19937_64 rng(request.seed);
  return concept_inpaint_local(request.image, request.fused_mask, denoiser, request.concept_id, *codec_,
                               request.strength, request.steps, schedule_, rng, options_);
}

ImageBuffer inpaint_preserving(InpaintBackend& backend, const InpaintRequest& request) {
  require_same_size(request.image, request.fused_mask, "inpaint request");
  ImageBuffer out;
  try {
    out = backend.inpaint(request);
  } catch (const VistaError&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::kBackendFailure, e.what());
  }
  if (!same_size(out, request.image)) {
    fail(ErrorKind::kContractViolation, "backend changed image dimensions");
  }
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
  return blend(request.image, out, request.fused_mask);
}

std::vector<ImageBuffer> inpaint_all(InpaintBackend& backend, const std::vector<InpaintRequest>& requests,
                                     int max_in_flight) {
  std::vector<ImageBuffer> out(requests.size());
  const std::size_t batch = static_cast<std::size_t>(std::max(1, max_in_flight));
  for (std::size_t start = 0; start < requests.size(); start += batch) {
    const std::size_t end = std::min(requests.size(), start + batch);
    std::vector<std::future<ImageBuffer>> jobs;
    for (std::size_t k = start; k < end; ++k) {
      jobs.push_back(std::async(std::launch::async,
                                [&backend, &requests, k] { return inpaint_preserving(backend, requests[k]); }));
    }
    for (std::size_t k = start; k < end; ++k) out[k] = jobs[k - start].get();
  }
  return out;
}

}  // namespace vista
