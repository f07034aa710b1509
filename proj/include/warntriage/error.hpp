#pragma once

#include <stdexcept>
#include <string>

namespace warntriage {

/// Base of every error thrown by the library. Each subclass maps onto one
/// CLI exit code (see pipeline.hpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedReport : public Error {
public:
    using Error::Error;
};

class RepoAccessError : public Error {
public:
    using Error::Error;
};

class UnresolvedRef : public Error {
public:
    using Error::Error;
};

class CycleDetected : public Error {
public:
    using Error::Error;
};

class BuildTimeout : public Error {
public:
    using Error::Error;
};

class BuildFailure : public Error {
public:
    using Error::Error;
};

class MissingReplayData : public Error {
public:
    using Error::Error;
};

class DegenerateData : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Missing, unreadable, or mismatched upstream artifact (checkpoint, dataset).
class ArtifactError : public Error {
public:
    using Error::Error;
};

} // namespace warntriage
