// Scorer living in a child process, spoken to with one JSON object per line
// over the child's stdin/stdout.
//
// Requests:
//   {"op":"fwd_sig","source":S,"beam":N}
//   {"op":"fwd_sent","source":S,"signature":"0110...","beam":N}
//   {"op":"bwd","source":S,"signature":"0110..."}   or   ...,"sentence":Y}
// Replies:
//   {"candidates":[{"payload":P,"logprob":L}, ...]}   for fwd_*
//   {"logprob":L}                                       for bwd
//   {"error":"message"}                                 on scorer-side failure

#include <chrono>
#include <csignal>
#include <cstring>
#include <mutex>
#include <thread>

#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "cod3s/errors.hpp"
#include "cod3s/scorer.hpp"

namespace cod3s {
namespace {

using json = nlohmann::json;

/// Child running `/bin/sh -c command` with stdin/stdout bound to one end of
/// a socket pair. Sockets rather than pipes so a write to a dead child fails
/// with EPIPE instead of raising SIGPIPE in this process.
class ChildChannel {
 public:
  explicit ChildChannel(const std::string& command) : command_(command) {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
      throw IoError("socketpair failed: " + std::string(std::strerror(errno)));
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      ::close(fds[0]);
      ::close(fds[1]);
      throw IoError("fork failed: " + std::string(std::strerror(errno)));
    }
    if (pid_ == 0) {
      ::close(fds[0]);
      ::dup2(fds[1], STDIN_FILENO);
      ::dup2(fds[1], STDOUT_FILENO);
      if (fds[1] != STDIN_FILENO && fds[1] != STDOUT_FILENO) ::close(fds[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(fds[1]);
    fd_ = fds[0];
  }

  ChildChannel(const ChildChannel&) = delete;
  ChildChannel& operator=(const ChildChannel&) = delete;

  ~ChildChannel() {
    if (fd_ >= 0) ::close(fd_);
    if (pid_ > 0 && !reaped_) {
      // Closing the socket gives the child EOF; give it a moment to leave.
      for (int i = 0; i < 100; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }

  std::string round_trip(const std::string& request) {
    std::string line = request;
    line.push_back('\n');
    std::size_t sent = 0;
    while (sent < line.size()) {
      const ssize_t n =
          ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail("write to scorer process failed: " +
                 std::string(std::strerror(errno)),
             "");
      }
      sent += static_cast<std::size_t>(n);
    }
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string reply = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return reply;
      }
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail("read from scorer process failed: " +
                 std::string(std::strerror(errno)),
             buffer_);
      }
      if (n == 0) fail("scorer process closed its output", buffer_);
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& what, const std::string& raw) {
    std::string status;
    int wstatus = 0;
    if (!reaped_ && ::waitpid(pid_, &wstatus, 0) == pid_) {
      reaped_ = true;
      if (WIFEXITED(wstatus)) {
        status = " (exit status " + std::to_string(WEXITSTATUS(wstatus)) + ")";
      } else if (WIFSIGNALED(wstatus)) {
        status = " (killed by signal " + std::to_string(WTERMSIG(wstatus)) + ")";
      }
    }
    throw GatewayError(what + status + " [" + command_ + "]", raw);
  }

  std::string command_;
  pid_t pid_ = -1;
  int fd_ = -1;
  bool reaped_ = false;
  std::string buffer_;
};

class ProcessScorer final : public ScorerBackend {
 public:
  explicit ProcessScorer(const std::string& command) : channel_(command) {}

  std::vector<ScoredCandidate> forward_signatures(const std::string& source,
                                                  std::size_t beam) override {
    json req = {{"op", "fwd_sig"}, {"source", source}, {"beam", beam}};
    return candidates(req, true);
  }

  std::vector<ScoredCandidate> forward_sentences(const std::string& source,
                                                 const Signature& signature,
                                                 std::size_t beam) override {
    json req = {{"op", "fwd_sent"},
                {"source", source},
                {"signature", signature.to_string()},
                {"beam", beam}};
    return candidates(req, false);
  }

  double backward_score(const std::string& source,
                        const Payload& payload) override {
    json req = {{"op", "bwd"}, {"source", source}};
    if (const auto* sig = std::get_if<Signature>(&payload)) {
      req["signature"] = sig->to_string();
    } else {
      req["sentence"] = std::get<std::string>(payload);
    }
    const auto [reply, raw] = exchange(req);
    try {
      return reply.at("logprob").get<double>();
    } catch (const json::exception& e) {
      throw GatewayError("malformed scorer reply: " + std::string(e.what()), raw);
    }
  }

  bool concurrent_safe() const noexcept override { return false; }

 private:
  std::pair<json, std::string> exchange(const json& request) {
    std::string raw;
    {
      std::lock_guard lock(mutex_);
      raw = channel_.round_trip(request.dump());
    }
    json reply;
    try {
      reply = json::parse(raw);
    } catch (const json::exception& e) {
      throw GatewayError("malformed scorer reply: " + std::string(e.what()), raw);
    }
    if (!reply.is_object()) throw GatewayError("scorer reply is not an object", raw);
    if (reply.contains("error")) {
      throw GatewayError("scorer reported an error: " + reply["error"].dump(), raw);
    }
    return {std::move(reply), std::move(raw)};
  }

  std::vector<ScoredCandidate> candidates(const json& request, bool signatures) {
    const auto [reply, raw] = exchange(request);
    std::vector<ScoredCandidate> out;
    try {
      for (const auto& c : reply.at("candidates")) {
        ScoredCandidate cand;
        const auto text = c.at("payload").get<std::string>();
        if (signatures) {
          cand.payload = Signature::parse(text);
        } else {
          cand.payload = text;
        }
        cand.forward_logprob = c.at("logprob").get<double>();
        cand.combined = cand.forward_logprob;
        out.push_back(std::move(cand));
      }
    } catch (const json::exception& e) {
      throw GatewayError("malformed scorer reply: " + std::string(e.what()), raw);
    } catch (const ParseError& e) {
      throw GatewayError("malformed signature in scorer reply: " +
                             std::string(e.what()),
                         raw);
    } catch (const DomainError& e) {
      throw GatewayError("malformed signature in scorer reply: " +
                             std::string(e.what()),
                         raw);
    }
    return out;
  }

  std::mutex mutex_;
  ChildChannel channel_;
};

}  // namespace

std::shared_ptr<ScorerBackend> make_process_backend(const std::string& command) {
  return std::make_shared<ProcessScorer>(command);
}

}  // namespace cod3s
