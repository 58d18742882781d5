#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace wnav {

/// One message to a vision-language model: text plus at most one PNG image.
struct ModelRequest {
    std::string text;
    std::vector<std::uint8_t> image_png;
    std::string image_ref;
    std::string data_ref;
    int stage = 0;
    /// Focus-area index for stage 3, -1 otherwise.
    int area = -1;
    /// Zero-based attempt number within the subtask.
    int attempt = 0;
};

class ModelClient {
public:
    virtual ~ModelClient() = default;
    /// Returns the model's reply text. Throws TransportError on transport problems.
    virtual std::string complete(const ModelRequest& request) = 0;
    virtual std::string name() const = 0;
};

/// Replays scripted replies keyed by stage (stage 3 may be keyed per area as
/// "3/<area>"). Attempt i receives reply i; past the end the last reply repeats.
///
/// Script document: {"replies": {"1": [...], "2": [...], "3": [...], "3/0": [...]}}
class MockClient : public ModelClient {
public:
    explicit MockClient(std::map<std::string, std::vector<std::string>> replies);

    static MockClient from_json(const nlohmann::json& script);
    static MockClient from_file(const std::filesystem::path& path);

    std::string complete(const ModelRequest& request) override;
    std::string name() const override { return "mock"; }

    std::size_t calls() const noexcept { return calls_; }
    nlohmann::json to_json() const;

private:
    std::map<std::string, std::vector<std::string>> replies_;
    std::size_t calls_ = 0;
};

struct HttpClientConfig {
    /// Full URL of the chat-completions endpoint, e.g. http://host:8000/v1/chat/completions.
    std::string endpoint;
    std::string model;
    std::string api_key;
    std::chrono::seconds timeout{120};
    double temperature = 0.0;
    int max_tokens = 4096;

    /// Reads WNAV_MODEL_ENDPOINT, WNAV_MODEL_NAME, WNAV_API_KEY and WNAV_TIMEOUT_S.
    static HttpClientConfig from_env();
    /// Config file with keys endpoint, model, api_key_env, timeout_s, temperature,
    /// max_tokens. Environment variables override file values when set.
    static HttpClientConfig from_file(const std::filesystem::path& path);
};

/// Chat-completions client sending the image as a base64 data URL.
class HttpChatClient : public ModelClient {
public:
    explicit HttpChatClient(HttpClientConfig config);

    std::string complete(const ModelRequest& request) override;
    std::string name() const override { return config_.model.empty() ? "http" : config_.model; }

    /// Request body for `request` (exposed for tests).
    nlohmann::json request_body(const ModelRequest& request) const;

private:
    HttpClientConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

std::string base64_encode(const std::vector<std::uint8_t>& data);

}  // namespace wnav
