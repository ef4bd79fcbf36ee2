// Instrumented-runner protocol for targets that print their own coverage:
//
//   toy_runner <target> <seed-file>
//
// Copies the target's coverage lines to stdout. Exits 0 when the target ran
// to completion and 77 when it died on a signal; any other outcome exits 1.

#include <cstdio>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: toy_runner <target> <seed-file>\n");
    return 1;
  }
  int fds[2];
  if (pipe(fds) != 0) return 1;
  const pid_t pid = fork();
  if (pid < 0) return 1;
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    close(fds[1]);
    execl(argv[1], argv[1], argv[2], static_cast<char*>(nullptr));
    _exit(126);
  }
  close(fds[1]);
  std::string out;
  char buf[4096];
  ssize_t n;
  while ((n = read(fds[0], buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
  close(fds[0]);
  int status = 0;
  waitpid(pid, &status, 0);

  const bool crashed = WIFSIGNALED(status);
  if (crashed && out.find("CRASH") == std::string::npos) {
    if (!out.empty() && out.back() != '\n') out += '\n';
    out += "CRASH ??\n";
  }
  std::fwrite(out.data(), 1, out.size(), stdout);
  if (crashed) return 77;
  return WIFEXITED(status) && WEXITSTATUS(status) == 0 ? 0 : 1;
}
