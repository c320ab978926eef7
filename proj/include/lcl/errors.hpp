#pragma once

#include <stdexcept>
#include <string>

namespace lcl {

// Exit-code mapping for the CLI: usage 1, numerical 2, io 3.
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& msg) : std::invalid_argument(msg) {}
};

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lcl
