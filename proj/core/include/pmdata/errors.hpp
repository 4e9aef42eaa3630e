#pragma once

#include <stdexcept>
#include <string>

namespace pmdata {

/// Root of every exception thrown by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ZeroAmount : public Error {
public:
    ZeroAmount() : Error("fill amount is zero") {}
};

/// Transient upstream failure; the caller retries on the next cycle.
class SourceUnavailable : public Error {
public:
    using Error::Error;
};

class DecodeError : public Error {
public:
    using Error::Error;
};

class UnknownBlock : public Error {
public:
    explicit UnknownBlock(unsigned long long block);
    unsigned long long block() const noexcept { return block_; }

private:
    unsigned long long block_;
};

class StorageUnavailable : public Error {
public:
    using Error::Error;
};

class DuplicateKey : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class PreconditionViolation : public Error {
public:
    using Error::Error;
};

class DegenerateInput : public Error {
public:
    using Error::Error;
};

class FitDegenerate : public Error {
public:
    using Error::Error;
};

class ConflictingMapping : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class NoPregameTrades : public Error {
public:
    NoPregameTrades() : Error("no trades strictly before the cutoff") {}
};

}  // namespace pmdata
