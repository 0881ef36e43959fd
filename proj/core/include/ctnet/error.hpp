// Copyright 2026 The ctnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ctnet {

/// Root of every error thrown by the library. The CLI maps subclasses to
/// process exit codes (see `exit_code_for`).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument to an operation (wrong length, out-of-range factor, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed on-disk artifact (bad magic, unparsable manifest, ...).
class FormatError : public Error {
public:
    using Error::Error;
};

/// On-disk artifact that parses but disagrees with itself (truncated payload,
/// manifest entry without its tensor file, ...).
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Operation invoked in a state where it is not defined (e.g. scoring against
/// an uninitialized prototype store).
class StateError : public Error {
public:
    using Error::Error;
};

/// A metric is undefined for the given input (a class is absent).
class MetricUndefinedError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite value.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Process exit code for an error: 2 for configuration and argument errors,
/// 3 for numerical aborts, 1 for everything else.
inline int exit_code_for(const Error& e)
{
    if (dynamic_cast<const NumericalError*>(&e) != nullptr) {
        return 3;
    }
    if (dynamic_cast<const ConfigError*>(&e) != nullptr || dynamic_cast<const ArgumentError*>(&e) != nullptr) {
        return 2;
    }
    return 1;
}

}  // namespace ctnet
