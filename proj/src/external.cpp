#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobo/problems.hpp"

namespace mobo {

namespace {

using Clock = std::chrono::steady_clock;

// One child process handling exactly one evaluation.
struct Child {
    pid_t pid = -1;
    int out_fd = -1;  // child's stdout, read end
    std::string buf;
    long id = 0;
    Vector design;
    Clock::time_point deadline;
    bool answered = false;
    double f1 = 0.0, f2 = 0.0, g = 0.0;
};

[[noreturn]] void fail(const Child& c, const std::string& what) {
    throw EvaluationError("external simulator: " + what, c.design);
}

void kill_and_reap(Child& c) {
    if (c.pid < 0) return;
    // the child runs in its own process group, so this also reaches any
    // grandchildren the shell forked
    ::kill(-c.pid, SIGKILL);
    ::kill(c.pid, SIGKILL);
    int status = 0;
    ::waitpid(c.pid, &status, 0);
    c.pid = -1;
}

std::string request_line(long id, const Vector& x) {
    nlohmann::json req;
    req["id"] = id;
    auto& arr = req["x"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) arr.push_back(x[i]);
    return req.dump() + "\n";
}

// Launch `/bin/sh -c command`, write the request to its stdin, close it.
Child spawn(const std::string& command, long id, const Vector& x,
            double timeout_seconds) {
    // a child that exits before reading must not kill us with SIGPIPE
    static const bool sigpipe_ignored = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)sigpipe_ignored;

    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
        throw EvaluationError("external simulator: pipe() failed", x);

    const pid_t pid = ::fork();
    if (pid < 0) throw EvaluationError("external simulator: fork() failed", x);
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
        _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::setpgid(pid, pid);  // both sides set it to close the fork/exec race

    Child c;
    c.pid = pid;
    c.out_fd = from_child[0];
    c.id = id;
    c.design = x;
    c.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(timeout_seconds));

    const std::string line = request_line(id, x);
    ssize_t off = 0;
    while (off < static_cast<ssize_t>(line.size())) {
        const ssize_t n = ::write(to_child[1], line.data() + off,
                                  line.size() - static_cast<std::size_t>(off));
        if (n < 0) break;  // child gone early; surfaces as a protocol error
        off += n;
    }
    ::close(to_child[1]);
    ::fcntl(c.out_fd, F_SETFL, O_NONBLOCK);
    return c;
}

void parse_response(Child& c, const std::string& line) {
    nlohmann::json rsp;
    try {
        rsp = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
        kill_and_reap(c);
        fail(c, "malformed response: " + line);
    }
    if (!rsp.is_object() || !rsp.contains("id") || !rsp.contains("f1") ||
        !rsp.contains("f2") || !rsp.contains("g")) {
        kill_and_reap(c);
        fail(c, "response missing required fields: " + line);
    }
    if (!rsp["id"].is_number_integer() || rsp["id"].get<long>() != c.id) {
        kill_and_reap(c);
        fail(c, "response id does not match request id " + std::to_string(c.id));
    }
    for (const char* key : {"f1", "f2", "g"})
        if (!rsp[key].is_number()) {
            kill_and_reap(c);
            fail(c, std::string("field ") + key + " is not a number");
        }
    c.f1 = rsp["f1"].get<double>();
    c.f2 = rsp["f2"].get<double>();
    c.g = rsp["g"].get<double>();
    if (!std::isfinite(c.f1) || !std::isfinite(c.f2) || !std::isfinite(c.g)) {
        kill_and_reap(c);
        fail(c, "non-finite value in response");
    }
    c.answered = true;
}

// Read until each child produced one full line or hit its deadline, then
// reap and check exit codes.
void drive(std::vector<Child>& wave) {
    std::vector<char> chunk(4096);
    while (true) {
        bool pending = false;
        std::vector<pollfd> fds;
        std::vector<std::size_t> owner;
        auto first_deadline = Clock::time_point::max();
        for (std::size_t i = 0; i < wave.size(); ++i) {
            Child& c = wave[i];
            if (c.answered || c.out_fd < 0) continue;
            pending = true;
            if (Clock::now() >= c.deadline) {
                kill_and_reap(c);
                fail(c, "timed out");
            }
            fds.push_back({c.out_fd, POLLIN, 0});
            owner.push_back(i);
            first_deadline = std::min(first_deadline, c.deadline);
        }
        if (!pending) break;

        const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(
            first_deadline - Clock::now());
        const int timeout_ms =
            static_cast<int>(std::clamp<long long>(wait.count(), 1, 1000));
        const int rc = ::poll(fds.data(), fds.size(), timeout_ms);
        if (rc < 0 && errno != EINTR)
            throw EvaluationError("external simulator: poll() failed",
                                  wave.front().design);
        if (rc <= 0) continue;

        for (std::size_t k = 0; k < fds.size(); ++k) {
            if (!(fds[k].revents & (POLLIN | POLLHUP))) continue;
            Child& c = wave[owner[k]];
            const ssize_t n = ::read(c.out_fd, chunk.data(), chunk.size());
            if (n > 0) {
                c.buf.append(chunk.data(), static_cast<std::size_t>(n));
            } else if (n == 0) {
                // EOF without a newline: let exit-status handling report it
                ::close(c.out_fd);
                c.out_fd = -1;
            } else if (errno != EAGAIN && errno != EINTR) {
                kill_and_reap(c);
                fail(c, "read() failed");
            }
            const auto nl = c.buf.find('\n');
            if (nl != std::string::npos) {
                const std::string line = c.buf.substr(0, nl);
                if (c.out_fd >= 0) {
                    ::close(c.out_fd);
                    c.out_fd = -1;
                }
                parse_response(c, line);
            }
            // a stream that closed with no complete line is settled; the
            // reap below reports it via exit status
        }

        // children whose stream closed without a full line fall through to
        // the reap below once nothing else is pending
        bool all_settled = true;
        for (const Child& c : wave)
            if (!c.answered && c.out_fd >= 0) all_settled = false;
        if (all_settled) break;
    }

    for (Child& c : wave) {
        if (c.out_fd >= 0) {
            ::close(c.out_fd);
            c.out_fd = -1;
        }
        if (c.pid < 0) continue;
        int status = 0;
        // the child already answered or closed its stream; give it until its
        // deadline to exit cleanly
        while (true) {
            const pid_t r = ::waitpid(c.pid, &status, WNOHANG);
            if (r == c.pid) {
                c.pid = -1;
                break;
            }
            if (r < 0 && errno != EINTR) {
                c.pid = -1;
                break;
            }
            if (Clock::now() >= c.deadline) {
                kill_and_reap(c);
                fail(c, "did not exit after answering");
            }
            ::usleep(2000);
        }
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
            fail(c, "exited with status " +
                        std::to_string(WIFEXITED(status) ? WEXITSTATUS(status)
                                                         : -1));
        if (!c.answered) fail(c, "closed its output without a response");
    }
}

}  // namespace

Problem external_adapter(std::string command,
                         std::vector<VariableSpec> variables,
                         ExternalOptions options) {
    if (command.empty()) throw InputError("external command must not be empty");
    if (!(options.timeout_seconds > 0.0))
        throw InputError("external timeout must be positive");
    if (options.max_concurrency < 1)
        throw InputError("external concurrency must be at least 1");

    auto next_id = std::make_shared<std::atomic<long>>(0);
    auto eval = [command = std::move(command), options, next_id](
                    const Matrix& U, Vector& f1, Vector& f2, Vector& g) {
        const auto n = U.rows();
        Eigen::Index row = 0;
        while (row < n) {
            const Eigen::Index take =
                std::min<Eigen::Index>(options.max_concurrency, n - row);
            std::vector<Child> wave;
            wave.reserve(static_cast<std::size_t>(take));
            try {
                for (Eigen::Index k = 0; k < take; ++k)
                    wave.push_back(spawn(command, next_id->fetch_add(1) + 1,
                                         U.row(row + k),
                                         options.timeout_seconds));
                drive(wave);
            } catch (...) {
                for (Child& c : wave) {
                    if (c.out_fd >= 0) ::close(c.out_fd);
                    kill_and_reap(c);
                }
                throw;
            }
            for (Eigen::Index k = 0; k < take; ++k) {
                f1[row + k] = wave[static_cast<std::size_t>(k)].f1;
                f2[row + k] = wave[static_cast<std::size_t>(k)].f2;
                g[row + k] = wave[static_cast<std::size_t>(k)].g;
            }
            row += take;
        }
    };
    return Problem("external", std::move(variables), std::move(eval));
}

Problem external_adapter(std::string command, int dimension,
                         ExternalOptions options) {
    if (dimension < 1) throw InputError("external dimension must be positive");
    std::vector<VariableSpec> vars;
    for (int i = 1; i <= dimension; ++i)
        vars.push_back({"x" + std::to_string(i), 0.0, 1.0, "-", 0.0, 1.0});
    return external_adapter(std::move(command), std::move(vars), options);
}

}  // namespace mobo
