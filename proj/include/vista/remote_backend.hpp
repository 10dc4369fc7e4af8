#pragma once

#include <string>

#include "vista/backend.hpp"

namespace vista {

struct RemoteOptions {
  int attempts = 3;
  int backoff_ms = 200;  // doubled after each failed attempt
  int connect_timeout_s = 10;
  int timeout_s = 600;
  int learn_steps = 3000;
  int token_count = 1;
  double drift_tolerance = 2.0 / 255.0;
};

/// HTTP client for the inpainting service (multipart requests, PNG payloads).
class RemoteBackend : public InpaintBackend {
 public:
  explicit RemoteBackend(std::string endpoint, RemoteOptions options = {});
  std::string learn_concept(const std::vector<ImageBuffer>& images,
                            const std::vector<MaskMap>& fused_masks) override;
  /// Throws kContractViolation when dimensions change or unmasked pixels drift past tolerance.
  ImageBuffer inpaint(const InpaintRequest& request) override;

 private:
  std::string endpoint_;
  RemoteOptions options_;
};

}  // namespace vista
