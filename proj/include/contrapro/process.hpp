#pragma once

// External scorer process speaking newline-delimited JSON on stdin/stdout.
//
//   > {"protocol":1,"score_kind_requested":"logprob"}
//   < {"protocol":1,"score_kind":"logprob"}        (or "nll")
//   > {"id":..,"src_context":[..],"src":..,"tgt_context":[..],"tgt":..}
//   < {"id":..,"score":..}
//
// One request in flight at a time. POSIX only.

#include <contrapro/error.hpp>
#include <contrapro/scorer.hpp>

#include <json.hpp>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace contrapro {

inline constexpr int kProtocolVersion = 1;

enum class ScoreKind { logprob, nll };

inline std::string_view to_string(ScoreKind k) { return k == ScoreKind::logprob ? "logprob" : "nll"; }

inline std::string handshake_line() {
  nlohmann::ordered_json j;
  j["protocol"] = kProtocolVersion;
  j["score_kind_requested"] = "logprob";
  return j.dump();
}

inline std::string request_line(const ScoreRequest& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["src_context"] = r.src_context;
  j["src"] = r.src;
  j["tgt_context"] = r.tgt_context;
  j["tgt"] = r.tgt;
  return j.dump();
}

inline ScoreKind parse_handshake_reply(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("malformed handshake reply: " + line);
  }
  if (!j.is_object() || !j.contains("protocol") || j["protocol"] != kProtocolVersion)
    throw ProtocolError("handshake reply without protocol " + std::to_string(kProtocolVersion) + ": " + line);
  auto kind = j.value("score_kind", nlohmann::json());
  if (kind == "logprob") return ScoreKind::logprob;
  if (kind == "nll") return ScoreKind::nll;
  throw ProtocolError("handshake reply with unknown score_kind: " + line);
}

/// Parses one response line for request `expected_id`; nll scores are negated.
inline ScoreResponse parse_response_line(const std::string& line, const std::string& expected_id, ScoreKind kind) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("malformed response to request '" + expected_id + "': " + line);
  }
  if (!j.is_object()) throw ProtocolError("response to request '" + expected_id + "' is not an object");
  if (j.contains("error"))
    throw ProtocolError("scorer reported an error for request '" + expected_id + "': " + j["error"].dump());
  if (!j.contains("id") || !j["id"].is_string())
    throw ProtocolError("response to request '" + expected_id + "' has no string id");
  std::string id = j["id"].get<std::string>();
  if (!j.contains("score") || !j["score"].is_number())
    throw ProtocolError("non-finite or missing score for id '" + id + "'");
  double s = j["score"].get<double>();
  if (!std::isfinite(s)) throw ProtocolError("non-finite score for id '" + id + "'");
  return {id, kind == ScoreKind::nll ? -s : s};
}

struct ProcessOptions {
  /// Seconds to wait for any single line; 0 waits forever.
  double timeout = 0;
  /// When set, every line exchanged is appended here, prefixed "> " or "< ".
  std::string transcript_path;
  /// When set, a scorer declaring another kind is a protocol error.
  std::optional<ScoreKind> expect_kind;
};

inline ScoreKind parse_score_kind(std::string_view s) {
  if (s == "logprob") return ScoreKind::logprob;
  if (s == "nll") return ScoreKind::nll;
  throw UsageError("unknown score kind '" + std::string(s) + "' (expected logprob or nll)");
}

/// Runs `/bin/sh -c command` once per score() call. Ignores SIGPIPE for the
/// whole process so a dead scorer surfaces as a TransportError.
class ProcessScorer : public Scorer {
public:
  explicit ProcessScorer(std::string command, ProcessOptions opt = {})
      : command_(std::move(command)), opt_(std::move(opt)) {
    if (command_.empty()) throw UsageError("empty scorer command");
    std::signal(SIGPIPE, SIG_IGN);
  }

  ~ProcessScorer() override { stop(true); }

  ProcessScorer(const ProcessScorer&) = delete;
  ProcessScorer& operator=(const ProcessScorer&) = delete;

  std::string name() const override { return command_; }

  std::optional<ScoreKind> score_kind() const { return kind_; }
  const std::vector<std::string>& transcript() const { return transcript_; }

  std::vector<ScoreResponse> score(const std::vector<ScoreRequest>& requests,
                                   const std::vector<ScoreHint>&) override {
    std::vector<ScoreResponse> out;
    out.reserve(requests.size());
    start();
    try {
      send(handshake_line(), 0, requests.size());
      kind_ = parse_handshake_reply(receive(0, requests.size()));
      if (opt_.expect_kind && *opt_.expect_kind != *kind_)
        throw ProtocolError("scorer declared score_kind " + std::string(to_string(*kind_)) + ", expected " +
                            std::string(to_string(*opt_.expect_kind)));
      std::set<std::string> seen;
      for (const auto& r : requests) {
        send(request_line(r), out.size(), requests.size());
        auto resp = parse_response_line(receive(out.size(), requests.size()), r.id, *kind_);
        if (resp.id != r.id) {
          if (seen.count(resp.id)) throw ProtocolError("duplicate response id '" + resp.id + "'");
          throw ProtocolError("response id '" + resp.id + "' does not match request '" + r.id + "'");
        }
        seen.insert(resp.id);
        out.push_back(std::move(resp));
      }
    } catch (...) {
      stop(true);
      throw;
    }
    stop(false);
    return out;
  }

private:
  void start() {
    int in[2];
    int outp[2];
    if (pipe2(in, O_CLOEXEC) != 0) throw TransportError(std::string("pipe: ") + std::strerror(errno), 0, 0);
    if (pipe2(outp, O_CLOEXEC) != 0) {
      close(in[0]);
      close(in[1]);
      throw TransportError(std::string("pipe: ") + std::strerror(errno), 0, 0);
    }
    pid_ = fork();
    if (pid_ < 0) {
      for (int fd : {in[0], in[1], outp[0], outp[1]}) close(fd);
      throw TransportError(std::string("fork: ") + std::strerror(errno), 0, 0);
    }
    if (pid_ == 0) {
      dup2(in[0], STDIN_FILENO);
      dup2(outp[1], STDOUT_FILENO);
      std::signal(SIGPIPE, SIG_DFL);
      execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(in[0]);
    close(outp[1]);
    to_child_ = in[1];
    from_child_ = outp[0];
    buffer_.clear();
  }

  // Closes our ends and reaps the child. Without `kill_child` the child gets
  // a grace period to exit on end of input.
  // Returns the wait status.
  int stop(bool kill_child) {
    if (to_child_ >= 0) close(to_child_);
    to_child_ = -1;
    if (from_child_ >= 0) close(from_child_);
    from_child_ = -1;
    int status = 0;
    if (pid_ <= 0) return status;
    if (!kill_child) {
      auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
      while (std::chrono::steady_clock::now() < deadline) {
        if (waitpid(pid_, &status, WNOHANG) == pid_) {
          pid_ = -1;
          return status;
        }
        usleep(2000);
      }
    }
    kill(pid_, SIGKILL);
    while (waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
    pid_ = -1;
    return status;
  }

  [[noreturn]] void died(std::size_t completed, std::size_t requested) {
    int status = stop(false);
    std::string how = WIFEXITED(status)     ? "exited with status " + std::to_string(WEXITSTATUS(status))
                      : WIFSIGNALED(status) ? "killed by signal " + std::to_string(WTERMSIG(status))
                                            : "stopped";
    throw TransportError("scorer '" + command_ + "' " + how, completed, requested);
  }

  void record(const char* dir, const std::string& line) {
    std::string entry = std::string(dir) + line;
    if (!opt_.transcript_path.empty()) {
      std::ofstream f(opt_.transcript_path, std::ios::app | std::ios::binary);
      f << entry << '\n';
    }
    transcript_.push_back(std::move(entry));
  }

  void send(const std::string& line, std::size_t completed, std::size_t requested) {
    record("> ", line);
    std::string data = line + '\n';
    std::size_t off = 0;
    while (off < data.size()) {
      ssize_t n = write(to_child_, data.data() + off, data.size() - off);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) died(completed, requested);
      off += static_cast<std::size_t>(n);
    }
  }

  std::string receive(std::size_t completed, std::size_t requested) {
    for (;;) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        record("< ", line);
        return line;
      }
      pollfd p{from_child_, POLLIN, 0};
      int timeout_ms = opt_.timeout > 0 ? static_cast<int>(opt_.timeout * 1000) : -1;
      int r = poll(&p, 1, timeout_ms);
      if (r < 0 && errno == EINTR) continue;
      if (r == 0) {
        stop(true);
        throw TransportError("scorer '" + command_ + "' timed out", completed, requested);
      }
      char chunk[4096];
      ssize_t n = read(from_child_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) died(completed, requested);
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::string command_;
  ProcessOptions opt_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::optional<ScoreKind> kind_;
  std::vector<std::string> transcript_;
};

}  // namespace contrapro
