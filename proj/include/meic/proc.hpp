#pragma once

// Shell-free subprocess launcher. Commands are explicit argument vectors,
// stdout and stderr are merged into one capture, and a hung child is killed
// together with its process group once the deadline passes.

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "meic/common.hpp"

namespace meic {

struct ProcResult {
  int exit_code = -1;       // child exit status, or 128+signal when signalled
  bool timed_out = false;   // deadline hit; the child was killed
  bool spawn_failed = false;  // exec never happened (missing binary, bad dir)
  std::string spawn_error;
  std::string output;       // merged stdout+stderr, capped
};

// Runs argv[0] with the given arguments. `workdir` empty means inherit the
// current directory. Capture stops growing at `capture_cap` bytes but the
// pipe keeps draining so the child never blocks on a full pipe.
inline ProcResult run_process(const std::vector<std::string>& argv,
                              const std::string& workdir, double timeout_s,
                              size_t capture_cap = 4 * 1024 * 1024) {
  ProcResult result;
  if (argv.empty()) {
    result.spawn_failed = true;
    result.spawn_error = "empty command";
    return result;
  }

  int out_pipe[2];
  int err_pipe[2];  // carries exec's errno back when exec fails
  if (pipe(out_pipe) != 0) {
    result.spawn_failed = true;
    result.spawn_error = std::strerror(errno);
    return result;
  }
  if (pipe(err_pipe) != 0) {
    result.spawn_failed = true;
    result.spawn_error = std::strerror(errno);
    close(out_pipe[0]);
    close(out_pipe[1]);
    return result;
  }
  fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);

  pid_t pid = fork();
  if (pid < 0) {
    result.spawn_failed = true;
    result.spawn_error = std::strerror(errno);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    return result;
  }

  if (pid == 0) {
    setpgid(0, 0);  // own process group, so a timeout can kill helpers too
    if (!workdir.empty() && chdir(workdir.c_str()) != 0) {
      int e = errno;
      ssize_t ignored = write(err_pipe[1], &e, sizeof(e));
      (void)ignored;
      _exit(127);
    }
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(out_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);

    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    int e = errno;
    ssize_t ignored = write(err_pipe[1], &e, sizeof(e));
    (void)ignored;
    _exit(127);
  }

  close(out_pipe[1]);
  close(err_pipe[1]);

  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration<double>(timeout_s);
  bool killed = false;
  char buf[8192];
  while (true) {
    auto now = std::chrono::steady_clock::now();
    int wait_ms = -1;
    if (!killed) {
      auto left =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      if (left <= 0) {
        kill(-pid, SIGKILL);
        kill(pid, SIGKILL);
        result.timed_out = true;
        killed = true;
        continue;
      }
      wait_ms = static_cast<int>(left);
    }
    struct pollfd pfd{out_pipe[0], POLLIN, 0};
    int rc = poll(&pfd, 1, wait_ms);
    if (rc == 0) continue;  // deadline check on next loop
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    ssize_t n = read(out_pipe[0], buf, sizeof(buf));
    if (n <= 0) break;  // EOF or error: child side closed
    if (result.output.size() < capture_cap) {
      size_t room = capture_cap - result.output.size();
      result.output.append(buf, static_cast<size_t>(n) < room ? static_cast<size_t>(n)
                                                              : room);
    }
  }
  close(out_pipe[0]);

  int spawn_errno = 0;
  ssize_t got = read(err_pipe[0], &spawn_errno, sizeof(spawn_errno));
  close(err_pipe[0]);
  if (got == sizeof(spawn_errno)) {
    result.spawn_failed = true;
    result.spawn_error = std::strerror(spawn_errno);
  }

  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
  return result;
}

}  // namespace meic
