// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mwc {

/// A single field-level validation failure, addressed by a JSON-pointer-like path.
struct FieldError {
    std::string path;
    std::string message;
};

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Scenario violates one of its invariants. Carries every failing field.
class InvalidScenario : public std::invalid_argument {
public:
    explicit InvalidScenario(std::vector<FieldError> errors);
    const std::vector<FieldError>& errors() const noexcept { return errors_; }

private:
    std::vector<FieldError> errors_;
};

/// Structural violation of an MWC configuration (not the advisory rate guidance).
class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Least-squares reconstruction on a support whose sensing columns are dependent.
class ReconstructionIllPosed : public std::runtime_error {
public:
    ReconstructionIllPosed(const std::string& what, std::vector<int> columns)
        : std::runtime_error(what), columns_(std::move(columns)) {}
    const std::vector<int>& columns() const noexcept { return columns_; }

private:
    std::vector<int> columns_;
};

}  // namespace mwc
