#include "tea/remote_oracle.hpp"

#include <httplib.h>

#include <json.hpp>

#include "tea/error.hpp"

namespace tea {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host:port
  std::string prefix;  // "" or "/something"
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ArgumentError("remote endpoint must look like http://host:port, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    ep.prefix = url.substr(path_start);
    while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  }
  return ep;
}

std::string describe(const httplib::Result& res) {
  if (!res) return "transport failure: " + httplib::to_string(res.error());
  std::string msg = "HTTP " + std::to_string(res->status);
  try {
    const json body = json::parse(res->body);
    if (body.contains("error")) msg += ": " + body.at("error").get<std::string>();
  } catch (const json::exception&) {
    // non-JSON error body; the status is enough
  }
  return msg;
}

std::size_t get_count(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long long>() <= 0) {
    throw ProtocolError(std::string("/info: missing or non-positive integer '") + key + "'");
  }
  return j.at(key).get<std::size_t>();
}

}  // namespace

struct RemoteOracle::Impl {
  Endpoint endpoint;
  httplib::Client client;

  Impl(Endpoint ep, double timeout) : endpoint(std::move(ep)), client(endpoint.origin) {
    const auto sec = static_cast<time_t>(timeout);
    const auto usec = static_cast<time_t>((timeout - static_cast<double>(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
  }
};

RemoteOracle::RemoteOracle(const std::string& endpoint, double timeout_seconds)
    : impl_(std::make_unique<Impl>(split_endpoint(endpoint), timeout_seconds)) {
  auto res = impl_->client.Get(impl_->endpoint.prefix + "/info");
  if (!res || res->status != 200) throw TransportError("GET /info: " + describe(res));
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("/info: malformed JSON: ") + e.what());
  }
  info_.classes = get_count(body, "classes");
  info_.shape = {get_count(body, "channels"), get_count(body, "height"), get_count(body, "width")};
}

RemoteOracle::~RemoteOracle() = default;

Label RemoteOracle::classify(const Image& img) {
  check_shape(img);
  auto res = impl_->client.Post(impl_->endpoint.prefix + "/classify", encode_classify_request(img),
                                "application/json");
  if (!res || res->status != 200) throw TransportError("POST /classify: " + describe(res));
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("/classify: malformed JSON: ") + e.what());
  }
  if (!body.contains("label") || !body.at("label").is_number_integer()) {
    throw ProtocolError("/classify: response has no integer 'label'");
  }
  const auto label = body.at("label").get<long long>();
  if (label < 0 || static_cast<std::size_t>(label) >= info_.classes) {
    throw ProtocolError("/classify: label " + std::to_string(label) + " outside [0, " +
                        std::to_string(info_.classes) + ")");
  }
  return static_cast<Label>(label);
}

Label remote_classify(const std::string& endpoint, const Image& img) {
  RemoteOracle oracle(endpoint);
  return oracle.classify(img);
}

std::string encode_classify_request(const Image& img) {
  json body;
  // Shortest round-trip decimal, so a server sees exactly the queried point.
  body["data"] = std::vector<double>(img.data().begin(), img.data().end());
  return body.dump();
}

std::string encode_info(const RemoteInfo& info) {
  return json{{"classes", info.classes},
              {"channels", info.shape.channels},
              {"height", info.shape.height},
              {"width", info.shape.width}}
      .dump();
}

std::string encode_label(Label label) { return json{{"label", label}}.dump(); }

}  // namespace tea
