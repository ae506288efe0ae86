// Error types shared by every module of the dereverberation toolkit.

#ifndef CNMF_ERROR_HPP
#define CNMF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cnmf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File I/O and decoding
class IoError : public Error {
public:
    using Error::Error;
};

class MalformedFile : public IoError {
public:
    using IoError::IoError;
};

class UnsupportedFormat : public IoError {
public:
    using IoError::IoError;
};

// Shape and argument checks
class SampleRateMismatch : public Error {
public:
    using Error::Error;
};

class SignalTooShort : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class InvalidGeometry : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Raised when an update produces NaN/Inf. `iteration` is -1 when the
/// failure happened outside the solver loop.
class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& what, int iteration = -1)
        : Error(iteration < 0 ? what : what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}

    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

}  // namespace cnmf

#endif  // CNMF_ERROR_HPP
