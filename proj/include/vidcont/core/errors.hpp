#pragma once

#include <stdexcept>
#include <string>

namespace vidcont {

// Error taxonomy shared across the library. The CLI maps ConfigError to
// exit status 2 and everything else to exit status 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string &msg) : std::runtime_error(msg) {}
};

struct TrainError : std::runtime_error {
    explicit TrainError(const std::string &msg) : std::runtime_error(msg) {}
};

}  // namespace vidcont
