// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/git.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <set>

namespace pgir {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input,
                          const std::string& cwd) {
  if (argv.empty()) throw FatalError("run_process: empty command");
  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
    throw FatalError(std::string("pipe: ") + std::strerror(errno));
  }
  pid_t pid = ::fork();
  if (pid < 0) throw FatalError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) ::close(fd);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) ::_exit(127);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  int w = in_pipe[1], r = out_pipe[0], e = err_pipe[0];
  ::fcntl(w, F_SETFL, O_NONBLOCK);
  // a converter that exits early must not kill us
  struct sigaction ignore {}, old {};
  ignore.sa_handler = SIG_IGN;
  ::sigaction(SIGPIPE, &ignore, &old);

  ProcessResult res;
  std::size_t written = 0;
  if (input.empty()) close_fd(w);
  char buf[65536];
  while (r >= 0 || e >= 0 || w >= 0) {
    std::vector<pollfd> fds;
    if (w >= 0) fds.push_back({w, POLLOUT, 0});
    if (r >= 0) fds.push_back({r, POLLIN, 0});
    if (e >= 0) fds.push_back({e, POLLIN, 0});
    if (::poll(fds.data(), fds.size(), -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (const pollfd& p : fds) {
      if (p.revents == 0) continue;
      if (p.fd == w) {
        ssize_t n = ::write(w, input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (n < 0 && errno != EAGAIN) close_fd(w);
        if (written == input.size()) close_fd(w);
      } else {
        ssize_t n = ::read(p.fd, buf, sizeof buf);
        if (n > 0) {
          (p.fd == r ? res.out : res.err).append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || errno != EINTR) {
          if (p.fd == r) close_fd(r);
          else close_fd(e);
        }
      }
    }
  }
  ::sigaction(SIGPIPE, &old, nullptr);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  res.status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return res;
}

GitRepo::GitRepo(std::string path) : path_(std::move(path)) {
  ProcessResult r = run_process({"git", "-C", path_, "rev-parse", "--git-dir"});
  if (r.status != 0) throw FatalError("not a readable git repository: " + path_);
}

std::string GitRepo::git(const std::vector<std::string>& args) const {
  std::vector<std::string> argv{"git", "-C", path_};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessResult r = run_process(argv);
  if (r.status != 0) {
    std::string cmd;
    for (const auto& a : args) cmd += " " + a;
    throw FatalError("git" + cmd + " failed: " + std::string(trim(r.err)));
  }
  return r.out;
}

std::string GitRepo::resolve(std::string_view ref) const {
  ProcessResult r =
      run_process({"git", "-C", path_, "rev-parse", "--verify", "--quiet", std::string(ref) + "^{commit}"});
  if (r.status != 0) throw FatalError("cannot resolve revision '" + std::string(ref) + "' in " + path_);
  return std::string(trim(r.out));
}

std::vector<CommitInfo> GitRepo::first_parent_history(const std::string& commit) const {
  std::string out = git({"log", "--first-parent", "--reverse", "--format=%H%x09%P%x09%at", commit});
  std::vector<CommitInfo> commits;
  std::size_t pos = 0;
  while (pos < out.size()) {
    std::size_t nl = out.find('\n', pos);
    if (nl == std::string::npos) nl = out.size();
    std::string_view line(out.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t'), t2 = line.rfind('\t');
    if (t1 == std::string_view::npos || t2 == t1) throw FatalError("unexpected git log line");
    CommitInfo c;
    c.id = std::string(line.substr(0, t1));
    std::string_view parents = line.substr(t1 + 1, t2 - t1 - 1);
    while (!parents.empty()) {
      std::size_t sp = parents.find(' ');
      c.parents.emplace_back(parents.substr(0, sp));
      if (sp == std::string_view::npos) break;
      parents.remove_prefix(sp + 1);
    }
    auto t = parse_number(line.substr(t2 + 1));
    c.time = t ? static_cast<Timestamp>(*t) : 0;
    commits.push_back(std::move(c));
  }
  return commits;
}

std::vector<FileChange> GitRepo::diff(const std::string& from, const std::string& to) const {
  std::vector<std::string> args{"diff-tree", "-r", "--no-commit-id", "--no-renames", "--name-status", "-z"};
  if (from.empty()) {
    args.push_back("--root");
  } else {
    args.push_back(from);
  }
  args.push_back(to);
  std::string out = git(args);
  // -z output: STATUS NUL PATH NUL ...
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos < out.size()) {
    std::size_t z = out.find('\0', pos);
    if (z == std::string::npos) z = out.size();
    parts.emplace_back(out.substr(pos, z - pos));
    pos = z + 1;
  }
  std::vector<FileChange> changes;
  for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
    std::string status = std::string(trim(parts[i]));
    FileChange fc;
    fc.path = parts[i + 1];
    switch (status.empty() ? 'M' : status[0]) {
      case 'A':
        fc.kind = ChangeKind::Added;
        break;
      case 'D':
        fc.kind = ChangeKind::Deleted;
        break;
      default:
        fc.kind = ChangeKind::Modified;
        break;
    }
    changes.push_back(std::move(fc));
  }
  std::sort(changes.begin(), changes.end(),
            [](const FileChange& x, const FileChange& y) { return x.path < y.path; });
  return changes;
}

std::vector<FileChange> GitRepo::changes(const CommitInfo& c) const {
  std::vector<FileChange> first = diff(c.parents.empty() ? std::string() : c.parents[0], c.id);
  for (std::size_t k = 1; k < c.parents.size(); ++k) {
    std::set<std::string> other;
    for (const auto& fc : diff(c.parents[k], c.id)) other.insert(fc.path);
    std::erase_if(first, [&](const FileChange& fc) { return !other.count(fc.path); });
  }
  return first;
}

std::string GitRepo::blob(const std::string& commit, const std::string& path) const {
  return git({"cat-file", "blob", commit + ":" + path});
}

}  // namespace pgir
