#include "wnav/model_client.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "wnav/error.hpp"

namespace wnav {

using nlohmann::json;

std::string base64_encode(const std::vector<std::uint8_t>& data) {
    static constexpr char kAlphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < data.size(); i += 3) {
        const std::uint32_t v = (std::uint32_t{data[i]} << 16) | (std::uint32_t{data[i + 1]} << 8) | data[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (i < data.size()) {
        std::uint32_t v = std::uint32_t{data[i]} << 16;
        if (i + 1 < data.size()) {
            v |= std::uint32_t{data[i + 1]} << 8;
        }
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += i + 1 < data.size() ? kAlphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

// MockClient ----------------------------------------------------------------------

MockClient::MockClient(std::map<std::string, std::vector<std::string>> replies)
    : replies_(std::move(replies)) {}

MockClient MockClient::from_json(const json& script) {
    if (!script.is_object() || !script.contains("replies") || !script["replies"].is_object()) {
        throw InputError("mock script needs a \"replies\" object");
    }
    std::map<std::string, std::vector<std::string>> replies;
    for (const auto& [key, value] : script["replies"].items()) {
        if (value.is_string()) {
            replies[key] = {value.get<std::string>()};
        } else if (value.is_array() && !value.empty()) {
            for (const auto& r : value) {
                if (!r.is_string()) {
                    throw InputError("mock script replies for \"" + key + "\" must be strings");
                }
                replies[key].push_back(r.get<std::string>());
            }
        } else {
            throw InputError("mock script replies for \"" + key + "\" must be a non-empty list");
        }
    }
    return MockClient(std::move(replies));
}

MockClient MockClient::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open mock script " + path.string());
    }
    try {
        return from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ParseError("mock script " + path.string() + ": " + e.what(), 0, 0);
    }
}

std::string MockClient::complete(const ModelRequest& request) {
    ++calls_;
    const std::vector<std::string>* list = nullptr;
    if (request.stage == 3 && request.area >= 0) {
        if (auto it = replies_.find("3/" + std::to_string(request.area)); it != replies_.end()) {
            list = &it->second;
        }
    }
    if (list == nullptr) {
        if (auto it = replies_.find(std::to_string(request.stage)); it != replies_.end()) {
            list = &it->second;
        }
    }
    if (list == nullptr) {
        throw TransportError("mock script has no reply for stage " + std::to_string(request.stage) +
                             (request.area >= 0 ? " area " + std::to_string(request.area) : ""));
    }
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max(request.attempt, 0)),
                                         list->size() - 1);
    return (*list)[i];
}

json MockClient::to_json() const {
    json replies = json::object();
    for (const auto& [key, list] : replies_) {
        replies[key] = list;
    }
    return json{{"replies", replies}};
}

// HTTP client ----------------------------------------------------------------------

namespace {

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') {
        return std::nullopt;
    }
    return std::string(v);
}

void apply_env(HttpClientConfig& c) {
    if (auto v = env("WNAV_MODEL_ENDPOINT")) c.endpoint = *v;
    if (auto v = env("WNAV_MODEL_NAME")) c.model = *v;
    if (auto v = env("WNAV_API_KEY")) c.api_key = *v;
    if (auto v = env("WNAV_TIMEOUT_S")) {
        try {
            c.timeout = std::chrono::seconds(std::stol(*v));
        } catch (const std::exception&) {
            throw InputError("WNAV_TIMEOUT_S must be an integer number of seconds");
        }
    }
}

}  // namespace

HttpClientConfig HttpClientConfig::from_env() {
    HttpClientConfig c;
    apply_env(c);
    return c;
}

HttpClientConfig HttpClientConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open client config " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("client config " + path.string() + ": " + e.what(), 0, 0);
    }
    HttpClientConfig c;
    c.endpoint = j.value("endpoint", "");
    c.model = j.value("model", "");
    if (j.contains("api_key_env")) {
        c.api_key = env(j["api_key_env"].get<std::string>().c_str()).value_or("");
    }
    c.timeout = std::chrono::seconds(j.value("timeout_s", 120));
    c.temperature = j.value("temperature", 0.0);
    c.max_tokens = j.value("max_tokens", 4096);
    apply_env(c);
    return c;
}

HttpChatClient::HttpChatClient(HttpClientConfig config) : config_(std::move(config)) {
    const std::string& url = config_.endpoint;
    const auto scheme_end = url.find("://");
    if (url.empty() || scheme_end == std::string::npos) {
        throw InputError("model endpoint must be an http(s) URL, got \"" + url + "\"");
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw InputError("unsupported endpoint scheme \"" + scheme + "\"");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/v1/chat/completions" : url.substr(path_start);
    if (config_.timeout.count() <= 0) {
        throw InputError("client timeout must be positive");
    }
}

json HttpChatClient::request_body(const ModelRequest& request) const {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", request.text}});
    if (!request.image_png.empty()) {
        content.push_back({{"type", "image_url"},
                           {"image_url", {{"url", "data:image/png;base64," + base64_encode(request.image_png)}}}});
    }
    json body{{"messages", json::array({{{"role", "user"}, {"content", content}}})},
              {"temperature", config_.temperature},
              {"max_tokens", config_.max_tokens}};
    if (!config_.model.empty()) {
        body["model"] = config_.model;
    }
    return body;
}

std::string HttpChatClient::complete(const ModelRequest& request) {
    httplib::Client client(scheme_host_port_);
    const auto t = config_.timeout;
    client.set_connection_timeout(t);
    client.set_read_timeout(t);
    client.set_write_timeout(t);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    auto res = client.Post(path_, headers, request_body(request).dump(), "application/json");
    if (!res) {
        throw TransportError("request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw TransportError("model endpoint returned HTTP " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 200));
    }
    try {
        const json reply = json::parse(res->body);
        const json& content = reply.at("choices").at(0).at("message").at("content");
        if (content.is_string()) {
            return content.get<std::string>();
        }
        std::string text;
        for (const auto& part : content) {
            if (part.value("type", "") == "text") {
                text += part.at("text").get<std::string>();
            }
        }
        return text;
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed chat-completions response: ") + e.what());
    }
}

}  // namespace wnav
