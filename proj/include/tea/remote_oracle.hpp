#pragma once

#include <memory>
#include <string>

#include "tea/oracle.hpp"

namespace tea {

/// Remote model description advertised by GET /info.
struct RemoteInfo {
  std::size_t classes = 0;
  Shape shape;
};

/// Client for the hard-label HTTP protocol:
///
///   GET  /info     -> {"classes": K, "channels": C, "height": H, "width": W}
///   POST /classify    {"data": [C*H*W floats in [0,1]]} -> {"label": int}
///
/// Non-2xx replies and connection failures raise TransportError; bodies that
/// do not parse, or labels >= K, raise ProtocolError.
class RemoteOracle final : public Oracle {
 public:
  /// `endpoint` is "http://host:port" with an optional path prefix.
  /// Fetches /info immediately.
  explicit RemoteOracle(const std::string& endpoint, double timeout_seconds = 30.0);
  ~RemoteOracle() override;

  RemoteOracle(const RemoteOracle&) = delete;
  RemoteOracle& operator=(const RemoteOracle&) = delete;

  Label classify(const Image& img) override;
  [[nodiscard]] Shape input_shape() const override { return info_.shape; }
  [[nodiscard]] std::size_t num_classes() const override { return info_.classes; }

  [[nodiscard]] const RemoteInfo& info() const { return info_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  RemoteInfo info_;
};

/// One-shot convenience: connects, checks the shape and classifies.
Label remote_classify(const std::string& endpoint, const Image& img);

/// Wire encodings, exposed for servers and tests.
std::string encode_classify_request(const Image& img);
std::string encode_info(const RemoteInfo& info);
std::string encode_label(Label label);

}  // namespace tea
