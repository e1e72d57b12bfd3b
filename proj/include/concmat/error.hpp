#pragma once

#include <stdexcept>
#include <string>

namespace concmat {

// Error taxonomy shared by every module. Each class maps to one named failure
// kind so callers (and the CLI exit-code logic) can tell them apart.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    explicit InvalidParameter(const std::string& what)
        : Error("invalid parameter: " + what) {}
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what)
        : Error("invalid input: " + what) {}
};

class UnsupportedDimension : public Error {
public:
    explicit UnsupportedDimension(const std::string& what)
        : Error("unsupported dimension: " + what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what)
        : Error("domain error: " + what) {}
};

class SizeError : public Error {
public:
    explicit SizeError(const std::string& what)
        : Error("size error: " + what) {}
};

class UnboundedSupport : public Error {
public:
    explicit UnboundedSupport(const std::string& what)
        : Error("unbounded support: " + what) {}
};

}  // namespace concmat
