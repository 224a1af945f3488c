#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "dca/error.hpp"
#include "dca/oracle.hpp"
#include "json_util.hpp"

namespace dca {

using detail::json;

std::string make_request_line(const Assignment &x, std::uint64_t n_games, std::uint64_t seed) {
  json req;
  req["assignment"] = std::vector<ElementId>(x.order().begin(), x.order().end());
  req["games"] = n_games;
  req["seed"] = seed;
  return req.dump();
}

FitnessEstimate parse_response_line(std::string_view line) {
  auto fail = [&](const std::string &why) {
    return Error(Errc::oracle_io, why + "; raw payload: '" + std::string(line) + "'");
  };
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error &) {
    throw fail("malformed evaluator response");
  }
  if (!doc.is_object()) throw fail("evaluator response is not an object");
  for (const char *key : {"mean", "se", "n"}) {
    if (!doc.contains(key) || !doc.at(key).is_number()) {
      throw fail(std::string("evaluator response lacks numeric '") + key + "'");
    }
  }
  FitnessEstimate est;
  est.mean = doc.at("mean").get<double>();
  est.se = doc.at("se").get<double>();
  const auto n = doc.at("n").get<double>();
  if (!(est.se >= 0.0) || !(n >= 1.0)) throw fail("evaluator response out of range");
  est.n_games = static_cast<std::uint64_t>(n);
  return est;
}

struct SubprocessOracle::Child {
  pid_t pid = -1;
  int to_child = -1;
  int from_child = -1;
  std::string pending;  // bytes read past the last newline

  ~Child() {
    if (to_child >= 0) ::close(to_child);
    if (from_child >= 0) ::close(from_child);
    if (pid > 0) {
      ::kill(pid, SIGTERM);
      ::waitpid(pid, nullptr, 0);
    }
  }
};

SubprocessOracle::SubprocessOracle(Options options) : options_(std::move(options)) {
  if (options_.command.empty()) throw Error(Errc::config, "subprocess oracle needs a command");
  if (options_.max_children == 0) options_.max_children = 1;
  if (options_.timeout.count() <= 0) throw Error(Errc::config, "timeout must be positive");
}

SubprocessOracle::~SubprocessOracle() = default;

std::string SubprocessOracle::identity() const {
  std::string id = "subprocess:";
  for (const auto &arg : options_.command) id += arg + ' ';
  return id;
}

std::unique_ptr<SubprocessOracle::Child> SubprocessOracle::acquire() {
  {
    std::unique_lock lock(mutex_);
    available_.wait(lock, [&] { return !idle_.empty() || live_ < options_.max_children; });
    if (!idle_.empty()) {
      auto child = std::move(idle_.back());
      idle_.pop_back();
      return child;
    }
    ++live_;
  }
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0) {
    release(nullptr);
    throw Error(Errc::oracle_io, std::string("pipe failed: ") + std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    release(nullptr);
    throw Error(Errc::oracle_io, std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    std::vector<char *> argv;
    for (auto &arg : options_.command) argv.push_back(const_cast<char *>(arg.c_str()));
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  auto child = std::make_unique<Child>();
  child->pid = pid;
  child->to_child = in_pipe[1];
  child->from_child = out_pipe[0];
  return child;
}

void SubprocessOracle::release(std::unique_ptr<Child> child) {
  {
    std::lock_guard lock(mutex_);
    if (child) {
      idle_.push_back(std::move(child));
    } else {
      --live_;
    }
  }
  available_.notify_one();
}

FitnessEstimate SubprocessOracle::evaluate(const Assignment &x, std::uint64_t n_games,
                                           std::uint64_t seed) {
  auto child = acquire();
  auto fail = [&](const std::string &why) {
    child.reset();
    release(nullptr);
    return Error(Errc::oracle_io, why);
  };

  const std::string request = make_request_line(x, n_games, seed) + "\n";
  // Ignore SIGPIPE for this write; a dead child surfaces as EPIPE.
  struct sigaction ignore {}, previous {};
  ignore.sa_handler = SIG_IGN;
  ::sigaction(SIGPIPE, &ignore, &previous);
  std::size_t written = 0;
  while (written < request.size()) {
    const auto n = ::write(child->to_child, request.data() + written, request.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      ::sigaction(SIGPIPE, &previous, nullptr);
      throw fail("evaluator closed its input: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  ::sigaction(SIGPIPE, &previous, nullptr);

  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
  std::string &buf = child->pending;
  std::size_t newline;
  while ((newline = buf.find('\n')) == std::string::npos) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw fail("evaluator timed out; partial payload: '" + buf + "'");
    pollfd pfd{child->from_child, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready == 0) throw fail("evaluator timed out; partial payload: '" + buf + "'");
    char chunk[4096];
    const auto n = ::read(child->from_child, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw fail("evaluator exited; partial payload: '" + buf + "'");
    buf.append(chunk, static_cast<std::size_t>(n));
  }
  const std::string line = buf.substr(0, newline);
  buf.erase(0, newline + 1);
  FitnessEstimate est;
  try {
    est = parse_response_line(line);
  } catch (const Error &e) {
    throw fail(e.what());
  }
  release(std::move(child));
  return est;
}

}  // namespace dca
