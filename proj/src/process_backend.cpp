#include "ensfuzz/process_backend.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <glob.h>
#include <sched.h>
#include <signal.h>
#include <sstream>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

namespace ensfuzz {
namespace fs = std::filesystem;
namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << data;
  if (!out) throw Error("cannot write " + p.string());
}

std::vector<std::string> glob_files(const fs::path& dir, const std::string& pattern) {
  const std::string full = (dir / pattern).string();
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(full.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) {
      if (fs::is_regular_file(g.gl_pathv[i])) out.emplace_back(g.gl_pathv[i]);
    }
  }
  ::globfree(&g);
  return out;
}

void sleep_for(double seconds) {
  if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

}  // namespace

ExecutionResult replay_seed(const TargetSpec& target, const fs::path& seed_file, double timeout_seconds) {
  ExecutionResult failed;
  failed.replay_failed = true;

  int fds[2];
  if (::pipe(fds) != 0) return failed;
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    return failed;
  }
  if (pid == 0) {
    ::dup2(fds[1], STDOUT_FILENO);
    ::close(fds[0]);
    ::close(fds[1]);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
    ::setpgid(0, 0);
    ::execl(target.runner.c_str(), target.runner.c_str(), target.path.c_str(), seed_file.c_str(),
            static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  ::fcntl(fds[0], F_SETFL, O_NONBLOCK);

  std::string out;
  char buf[4096];
  int status = 0;
  bool done = false;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
  while (true) {
    ssize_t n = ::read(fds[0], buf, sizeof buf);
    if (n > 0) {
      out.append(buf, static_cast<std::size_t>(n));
      continue;
    }
    if (!done && ::waitpid(pid, &status, WNOHANG) == pid) done = true;
    if (n == 0 && done) break;
    if (std::chrono::steady_clock::now() > deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      if (!done) ::waitpid(pid, &status, 0);
      ::close(fds[0]);
      return failed;
    }
    if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) break;
    sleep_for(0.001);
  }
  ::close(fds[0]);
  if (!done) ::waitpid(pid, &status, 0);
  if (!WIFEXITED(status)) return failed;

  const int code = WEXITSTATUS(status);
  if (code != kRunnerOk && code != kRunnerCrashed) return failed;
  ExecutionResult r;
  try {
    r = parse_coverage(out);
  } catch (const Error&) {
    return failed;
  }
  if (code == kRunnerCrashed) {
    r.crashed = true;
    if (r.stack_frames.empty()) r.stack_frames.push_back(Frame{"??", 0});
  } else {
    r.crashed = false;
    r.stack_frames.clear();
  }
  return r;
}

ProcessBackend::ProcessBackend(ProcessOptions options) : options_(std::move(options)) {
  for (const auto& [name, spec] : options_.adapters) spec.validate();
  fs::create_directories(options_.workdir / "global");
  fs::create_directories(options_.workdir / "replay");
}

ProcessBackend::~ProcessBackend() {
  for (auto& [id, inst] : instances_) {
    if (!inst.stopped && inst.handle.state == Liveness::Running) terminate(inst);
  }
}

void ProcessBackend::begin_round(std::size_t round, double round_time) {
  round_ = round;
  round_time_ = round_time;
  instances_.clear();
  occupied_.clear();
  round_dir_ = options_.workdir / ("round-" + std::to_string(round));
  fs::remove_all(round_dir_);
  fs::create_directories(round_dir_);
  t0_ = std::chrono::steady_clock::now();
}

double ProcessBackend::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
}

void ProcessBackend::reap() {
  for (auto& [id, inst] : instances_) {
    if (inst.handle.state != Liveness::Running) continue;
    int status = 0;
    if (::waitpid(inst.pid, &status, WNOHANG) == inst.pid) {
      inst.handle.state = Liveness::Exited;
      inst.end = std::min(now(), inst.deadline);
      occupied_.erase(inst.handle.unit);
    }
  }
}

void ProcessBackend::terminate(Instance& inst) {
  ::kill(-inst.pid, SIGTERM);
  const auto give_up = std::chrono::steady_clock::now() + std::chrono::duration<double>(options_.grace_seconds);
  int status = 0;
  while (::waitpid(inst.pid, &status, WNOHANG) != inst.pid) {
    if (std::chrono::steady_clock::now() >= give_up) {
      ::kill(-inst.pid, SIGKILL);
      ::waitpid(inst.pid, &status, 0);
      break;
    }
    sleep_for(0.01);
  }
  // Stragglers in the process group that ignored SIGTERM.
  ::kill(-inst.pid, SIGKILL);
  inst.handle.state = Liveness::Exited;
  occupied_.erase(inst.handle.unit);
}

void ProcessBackend::advance_to(double t) {
  while (true) {
    reap();
    const double n = now();
    for (auto& [id, inst] : instances_) {
      if (inst.handle.state == Liveness::Running && n >= inst.deadline) {
        inst.end = inst.deadline;
        terminate(inst);
      }
    }
    if (n >= t) break;
    sleep_for(std::min(0.05, t - n));
  }
}

InstanceHandle ProcessBackend::spawn(const FuzzerId& fuzzer, UnitId unit, const SeedPool& corpus,
                                     double budget) {
  reap();
  if (occupied_.contains(unit)) {
    throw Error("spawn: unit " + std::to_string(unit) + " is already running an instance");
  }
  auto it = options_.adapters.find(fuzzer);
  if (it == options_.adapters.end()) throw Error("spawn: no adapter for fuzzer '" + fuzzer + "'");
  const AdapterSpec& spec = it->second;

  Instance inst;
  inst.handle.id = ++spawned_;
  inst.handle.fuzzer = fuzzer;
  inst.handle.unit = unit;
  inst.spec = &spec;
  const fs::path group = round_dir_ / fuzzer;
  inst.queue = group / "queue";
  const std::string tag = "unit-" + std::to_string(unit) + "-" + std::to_string(inst.handle.id);
  inst.out = group / tag;
  fs::create_directories(inst.queue);
  fs::create_directories(inst.out);
  for (const auto& [id, seed] : corpus) {
    const auto p = inst.queue / id.hex();
    if (!fs::exists(p)) write_file(p, seed.payload);
  }

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t core = unit % hw;
  const std::string cmd = expand_template(spec.cmd, options_.target.path, fs::absolute(inst.queue).string(),
                                          fs::absolute(inst.out).string(), core);
  const std::string log = (group / (tag + ".log")).string();

  const pid_t pid = ::fork();
  if (pid < 0) throw Error("spawn '" + cmd + "': fork failed: " + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(core, &set);
    ::sched_setaffinity(0, sizeof set, &set);
    int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      ::dup2(fd, STDOUT_FILENO);
      ::dup2(fd, STDERR_FILENO);
      ::close(fd);
    }
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  inst.pid = pid;
  inst.handle.start = now();
  inst.deadline = inst.handle.start + budget;
  occupied_[unit] = inst.handle.id;
  auto handle = inst.handle;
  instances_.emplace(handle.id, std::move(inst));
  return handle;
}

ProcessBackend::Instance& ProcessBackend::lookup(const InstanceHandle& h) {
  auto it = instances_.find(h.id);
  if (it == instances_.end()) throw Error("unknown instance handle");
  return it->second;
}

std::vector<Harvest> ProcessBackend::harvest(InstanceHandle& handle) {
  reap();
  auto& inst = lookup(handle);
  handle.state = inst.stopped ? Liveness::Stopped : inst.handle.state;
  std::vector<Harvest> out;
  std::vector<std::string> files = glob_files(inst.out, inst.spec->seeds_glob);
  if (!inst.spec->crashes_glob.empty()) {
    auto crashes = glob_files(inst.out, inst.spec->crashes_glob);
    files.insert(files.end(), crashes.begin(), crashes.end());
  }
  for (const auto& file : files) {
    if (!inst.seen.insert(file).second) continue;
    auto seed = Seed::make(read_file(file), inst.handle.fuzzer, round_);
    auto result = replay_seed(options_.target, file, options_.replay_timeout);
    const auto shared = inst.queue / seed.id.hex();
    if (!fs::exists(shared)) write_file(shared, seed.payload);
    out.push_back(Harvest{std::move(seed), std::move(result)});
  }
  return out;
}

double ProcessBackend::stop(InstanceHandle& handle) {
  reap();
  auto& inst = lookup(handle);
  if (!inst.stopped) {
    if (inst.handle.state == Liveness::Running) {
      inst.end = now();
      terminate(inst);
    }
    inst.stopped = true;
    inst.fraction = round_time_ > 0.0 ? std::max(0.0, inst.end - inst.handle.start) / round_time_ : 0.0;
  }
  handle.state = Liveness::Stopped;
  return inst.fraction;
}

Liveness ProcessBackend::poll(InstanceHandle& handle) {
  reap();
  auto& inst = lookup(handle);
  handle.state = inst.stopped ? Liveness::Stopped : inst.handle.state;
  return handle.state;
}

ExecutionResult ProcessBackend::execute(const Seed& seed) {
  const auto p = options_.workdir / "replay" / seed.id.hex();
  write_file(p, seed.payload);
  return replay_seed(options_.target, p, options_.replay_timeout);
}

void ProcessBackend::end_round() {
  for (auto& [id, inst] : instances_) {
    if (inst.handle.state == Liveness::Running) {
      inst.end = now();
      terminate(inst);
    }
  }
}

void ProcessBackend::publish_global(const SeedPool& global) {
  const auto dir = options_.workdir / "global";
  for (const auto& [id, seed] : global) {
    const auto p = dir / id.hex();
    if (!fs::exists(p)) write_file(p, seed.payload);
  }
}

}  // namespace ensfuzz
