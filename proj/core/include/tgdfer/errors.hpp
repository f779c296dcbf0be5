#pragma once

#include <stdexcept>
#include <string>

namespace tgdfer {

// Root of every error the library throws on a contract violation.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class DegenerateVectorError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class GradientError : public Error {
public:
    using Error::Error;
};

// Bag / embedding / manifest / checkpoint file problems.
class FormatError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace tgdfer
