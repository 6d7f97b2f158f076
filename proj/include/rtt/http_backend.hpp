#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "rtt/backend.hpp"
#include "rtt/error.hpp"

namespace rtt {

// OpenAI-compatible chat-completions client. Requests carry n samples per
// call; banned words go out as a strong negative logit bias. Every call is
// appended to the transcript file so non-seedable runs stay auditable.
class HttpBackend : public Backend {
 public:
  struct Options {
    std::string base_url;  // http://host:port
    std::string model;     // wire-level model name
    std::string api_key;   // empty -> $RTT_API_KEY
    int max_in_flight = 4;
    int retries = 0;  // transport retries, clamped to [0,3]
    int timeout_seconds = 120;
    std::string transcript_path;  // empty disables transcripts
  };

  explicit HttpBackend(Options opts)
      : opts_(std::move(opts)),
        in_flight_(std::clamp(opts_.max_in_flight, 1, 64)) {
    if (opts_.api_key.empty()) {
      if (const char* env = std::getenv("RTT_API_KEY")) opts_.api_key = env;
    }
    if (opts_.retries < 0) opts_.retries = 0;
    if (opts_.retries > 3) opts_.retries = 3;
  }

  GenerationResult generate(const ModelProfile& profile, const PromptPayload& prompt,
                            const SamplingParams& params) override {
    check_inputs(profile, prompt, params);
    note_call();

    nlohmann::json body;
    body["model"] = opts_.model.empty() ? profile.name : opts_.model;
    body["messages"] = nlohmann::json::array();
    if (prompt.style == PromptStyle::chat && prompt.system_message) {
      body["messages"].push_back(
          {{"role", "system"}, {"content", *prompt.system_message}});
      body["messages"].push_back({{"role", "user"}, {"content", prompt.user_text}});
    } else {
      // non-chat profiles pointed at a chat endpoint send the rendered text
      body["messages"].push_back({{"role", "user"}, {"content", prompt.rendered_text()}});
    }
    body["temperature"] = params.temperature;
    body["top_p"] = params.top_p;
    body["n"] = params.num_samples;
    body["max_tokens"] = params.max_new_tokens;
    if (!profile.banned_words.empty()) {
      nlohmann::json bias;
      for (const auto& w : profile.banned_words) bias[w] = -100;
      body["logit_bias"] = std::move(bias);
    }

    in_flight_.acquire();
    std::string response_text;
    int status = 0;
    std::string transport_error;
    for (int attempt = 0; attempt <= opts_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
      }
      httplib::Client client(opts_.base_url);
      client.set_connection_timeout(opts_.timeout_seconds);
      client.set_read_timeout(opts_.timeout_seconds);
      httplib::Headers headers;
      if (!opts_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + opts_.api_key);
      }
      auto res = client.Post("/v1/chat/completions", headers, body.dump(),
                             "application/json");
      if (!res) {
        transport_error = httplib::to_string(res.error());
        continue;
      }
      status = res->status;
      response_text = res->body;
      transport_error.clear();
      break;
    }
    in_flight_.release();

    record_transcript(body, response_text, status, transport_error);

    if (!transport_error.empty()) {
      throw Error(ErrorKind::backend_unreachable,
                  opts_.base_url + ": " + transport_error);
    }
    if (status < 200 || status >= 300) {
      throw Error(ErrorKind::backend_unreachable,
                  "HTTP " + std::to_string(status) + " from " + opts_.base_url);
    }

    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(response_text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::malformed_response,
                  std::string("response is not JSON: ") + e.what());
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty()) {
      throw Error(ErrorKind::malformed_response, "response has no choices");
    }

    GenerationResult result;
    result.backend_name = name();
    for (const auto& choice : parsed["choices"]) {
      if (!choice.contains("message") || !choice["message"].contains("content")) {
        throw Error(ErrorKind::malformed_response, "choice lacks message.content");
      }
      std::string text = choice["message"]["content"].get<std::string>();
      result.token_counts.push_back(approx_token_count(text));
      result.samples.push_back(std::move(text));
      if (static_cast<int>(result.samples.size()) == params.num_samples) break;
    }
    if (static_cast<int>(result.samples.size()) != params.num_samples) {
      throw Error(ErrorKind::malformed_response,
                  "requested " + std::to_string(params.num_samples) + " samples, got " +
                      std::to_string(result.samples.size()));
    }
    return result;
  }

  std::string name() const override {
    return "openai:" + (opts_.model.empty() ? "default" : opts_.model);
  }

 private:
  void record_transcript(const nlohmann::json& request, const std::string& response,
                         int status, const std::string& transport_error) {
    if (opts_.transcript_path.empty()) return;
    nlohmann::json entry;
    {
      std::lock_guard<std::mutex> lock(transcript_mutex_);
      entry["call_index"] = transcript_index_++;
      entry["request"] = request;
      entry["status"] = status;
      if (!transport_error.empty()) entry["transport_error"] = transport_error;
      try {
        entry["response"] = nlohmann::json::parse(response);
      } catch (const nlohmann::json::exception&) {
        entry["response_raw"] = response;
      }
      std::ofstream out(opts_.transcript_path, std::ios::app);
      out << entry.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace)
          << "\n";
    }
  }

  Options opts_;
  std::counting_semaphore<64> in_flight_;
  std::mutex transcript_mutex_;
  long long transcript_index_ = 0;
};

}  // namespace rtt
