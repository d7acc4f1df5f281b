#pragma once

#include <stdexcept>
#include <string>

namespace pdn {

// Base of every error the toolkit raises; CLI maps these to nonzero exits.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidFloorplan : public Error {
public:
    using Error::Error;
};

class LayoutViolation : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class Divergence : public Error {
public:
    using Error::Error;
};

class NumericFault : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class CaseFileError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace pdn
