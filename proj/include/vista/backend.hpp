#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vista/diffusion.hpp"
#include "vista/image.hpp"

namespace vista {

struct InpaintRequest {
  ImageBuffer image;
  MaskMap fused_mask;
  std::string concept_id;
  double strength = 1.0;
  int steps = 50;
  std::uint64_t seed = 0;
  int view_id = -1;  // camera id of the image, for backends that key on it
};

class InpaintBackend {
 public:
  virtual ~InpaintBackend() = default;
  virtual std::string learn_concept(const std::vector<ImageBuffer>& images,
                                    const std::vector<MaskMap>& fused_masks) = 0;
  virtual ImageBuffer inpaint(const InpaintRequest& request) = 0;
};

/// Returns its input unchanged.
class IdentityBackend : public InpaintBackend {
 public:
  std::string learn_concept(const std::vector<ImageBuffer>& images,
                            const std::vector<MaskMap>& fused_masks) override;
  ImageBuffer inpaint(const InpaintRequest& request) override;
};

/// Runs the masked schedule in process with an oracle denoiser whose clean target is the
/// registered reference image for the request's view id.
class OracleBackend : public InpaintBackend {
 public:
  OracleBackend(std::map<int, ImageBuffer> references, std::shared_ptr<const Codec> codec,
                NoiseSchedule schedule = NoiseSchedule::linear(), RepaintOptions options = {});
  std::string learn_concept(const std::vector<ImageBuffer>& images,
                            const std::vector<MaskMap>& fused_masks) override;
  ImageBuffer inpaint(const InpaintRequest& request) override;

 private:
  std::map<int, ImageBuffer> references_;
  std::shared_ptr<const Codec> codec_;
  NoiseSchedule schedule_;
  RepaintOptions options_;
};

/// Calls the backend, checks dimensions, and applies the pixel composite so unmasked pixels are
/// returned exactly. Backend exceptions are rethrown as kBackendFailure unless already typed.
ImageBuffer inpaint_preserving(InpaintBackend& backend, const InpaintRequest& request);

/// Runs requests with at most `max_in_flight` concurrent calls; results keep request order.
std::vector<ImageBuffer> inpaint_all(InpaintBackend& backend, const std::vector<InpaintRequest>& requests,
                                     int max_in_flight = 2);

}  // namespace vista
