#pragma once

// Client side of the scorer/1 protocol: newline-delimited JSON over a child
// process's stdin/stdout.
//
//   request:  {"id":"<string>","path":"<image file>"}
//   response: {"id":"<string>","score":<number in [0,10]>}
//             {"id":"<string>","error":"<message>"}
//
// One response line per request, in request order. Images are written as
// temporary PNG files. POSIX only.

#include <chrono>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "streetsafe/errors.hpp"
#include "streetsafe/image.hpp"
#include "streetsafe/scorer.hpp"

namespace streetsafe::scorer {

struct ProcessScorerOptions {
  int timeout_ms = 30000;
  /// Directory for temporary crop files; a fresh one under the system temp
  /// directory when empty.
  std::filesystem::path temp_dir;
};

/// Parses one scorer/1 response line and checks it answers `expected_id`.
inline double parse_response(const std::string& line, const std::string& expected_id) {
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw ScoringError("scorer/1: non-JSON reply: " + line.substr(0, 200));
  }
  if (!reply.is_object() || !reply.contains("id") || !reply.at("id").is_string())
    throw ScoringError("scorer/1: reply without string id");
  const auto id = reply.at("id").get<std::string>();
  if (id != expected_id) throw ScoringError("scorer/1: out-of-order reply: expected id " + expected_id + ", got " + id);
  if (reply.contains("error")) throw ScoringError("scorer/1: scorer error: " + reply.at("error").dump());
  if (!reply.contains("score") || !reply.at("score").is_number())
    throw ScoringError("scorer/1: reply without numeric score");
  const double s = reply.at("score").get<double>();
  if (!(s >= 0.0 && s <= 10.0)) throw ScoringError("scorer/1: score outside [0,10]");
  return s;
}

inline std::string make_request(const std::string& id, const std::string& path) {
  nlohmann::json req = {{"id", id}, {"path", path}};
  return req.dump() + "\n";
}

class ProcessScorer final : public Scorer {
 public:
  explicit ProcessScorer(const std::string& command, ProcessScorerOptions options = {})
      : options_(std::move(options)) {
    std::signal(SIGPIPE, SIG_IGN);  // a dead child must surface as EPIPE, not kill us
    if (options_.temp_dir.empty()) {
      std::string templ = (std::filesystem::temp_directory_path() / "streetsafe-XXXXXX").string();
      if (!::mkdtemp(templ.data())) throw Error("cannot create temp directory");
      options_.temp_dir = templ;
      owns_temp_ = true;
    } else {
      std::filesystem::create_directories(options_.temp_dir);
    }

    int in_pipe[2], out_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) throw Error("pipe() failed");
    pid_ = ::fork();
    if (pid_ < 0) throw Error("fork() failed");
    if (pid_ == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  }

  ProcessScorer(const ProcessScorer&) = delete;
  ProcessScorer& operator=(const ProcessScorer&) = delete;

  ~ProcessScorer() override {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 100; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) {
          pid_ = -1;
          break;
        }
        ::usleep(10000);
      }
      if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
      }
    }
    if (owns_temp_) {
      std::error_code ec;
      std::filesystem::remove_all(options_.temp_dir, ec);
    }
  }

  double score(const Image& image) override {
    const std::string id = "r" + std::to_string(next_id_++);
    const auto path = (options_.temp_dir / (id + ".png")).string();
    if (image.empty()) throw ScoringError("scorer/1: cannot send an empty image");
    try {
      save_png(image, path);
    } catch (const ScoringError&) {
      throw;
    } catch (const Error& e) {
      throw ScoringError(std::string("scorer/1: cannot write crop file: ") + e.what());
    }
    struct Cleanup {
      std::string p;
      ~Cleanup() { std::remove(p.c_str()); }
    } cleanup{path};
    return score_path(id, path);
  }

  /// Sends a request for an existing file and waits for the reply.
  double score_path(const std::string& id, const std::string& path) {
    write_all(make_request(id, path));
    return parse_response(read_line(), id);
  }

 private:
  void write_all(const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
      const auto n = ::write(to_child_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScoringError(std::string("scorer/1: write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(options_.timeout_ms);
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw ScoringError("scorer/1: timeout waiting for reply");
      pollfd pfd{from_child_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ScoringError("scorer/1: poll failed");
      }
      if (rc == 0) throw ScoringError("scorer/1: timeout waiting for reply");
      char chunk[4096];
      const auto n = ::read(from_child_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScoringError("scorer/1: read failed");
      }
      if (n == 0) throw ScoringError("scorer/1: scorer process closed its output");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  ProcessScorerOptions options_;
  bool owns_temp_ = false;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  unsigned long next_id_ = 0;
};

/**
 * Server side of scorer/1: answers every request line read from `in` on
 * `out`, in order, flushing after each reply. Unreadable images and
 * malformed requests get an error reply and the loop continues. Scores are
 * clipped to [0,10]. Returns the number of requests answered.
 */
inline std::size_t serve(std::istream& in, std::ostream& out, Scorer& scorer) {
  std::size_t answered = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json reply;
    std::string id;
    try {
      const auto req = nlohmann::json::parse(line);
      if (!req.is_object() || !req.contains("id") || !req.at("id").is_string())
        throw ScoringError("request without string id");
      id = req.at("id").get<std::string>();
      reply["id"] = id;
      if (!req.contains("path") || !req.at("path").is_string()) throw ScoringError("request without path");
      const Image img = load_image(req.at("path").get<std::string>());
      double s = scorer.score(img);
      if (!std::isfinite(s)) throw ScoringError("non-finite score");
      reply["score"] = std::clamp(s, 0.0, 10.0);
    } catch (const std::exception& e) {
      reply = nlohmann::json{{"id", id}, {"error", e.what()}};
    }
    out << reply.dump() << '\n' << std::flush;
    ++answered;
  }
  return answered;
}

}  // namespace streetsafe::scorer
