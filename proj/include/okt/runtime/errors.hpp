#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace okt::runtime {

// Misuse of a keyed communication protocol (duplicate send, unknown key, ...).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DeadlockError : public std::runtime_error {
 public:
  explicit DeadlockError(std::vector<std::string> origins)
      : std::runtime_error(format(origins)), origins_(std::move(origins)) {}

  const std::vector<std::string>& origins() const noexcept { return origins_; }

 private:
  static std::string format(const std::vector<std::string>& origins) {
    std::string msg = "deadlock: all workers idle with " + std::to_string(origins.size()) +
                      " unready future(s):";
    for (const auto& o : origins) msg += " [" + (o.empty() ? std::string("<anonymous>") : o) + "]";
    return msg;
  }

  std::vector<std::string> origins_;
};

}  // namespace okt::runtime
