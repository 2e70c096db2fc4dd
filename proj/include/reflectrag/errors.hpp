#pragma once

#include <stdexcept>
#include <string>

namespace reflectrag {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorCategory {
    Config = 2,
    Io = 3,
    Backend = 4,
    Validation = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message),
          category_(category),
          code_(std::move(code)) {}

    ErrorCategory category() const { return category_; }
    const std::string& code() const { return code_; }

private:
    ErrorCategory category_;
    std::string code_;
};

#define REFLECTRAG_DEFINE_ERROR(NAME, CATEGORY, CODE)                  \
    class NAME : public Error {                                        \
    public:                                                            \
        explicit NAME(const std::string& message)                      \
            : Error(ErrorCategory::CATEGORY, CODE, message) {}         \
    }

REFLECTRAG_DEFINE_ERROR(UnknownTokenError, Validation, "UnknownToken");
REFLECTRAG_DEFINE_ERROR(EmptyInputError, Validation, "EmptyInput");
REFLECTRAG_DEFINE_ERROR(ZeroMassError, Validation, "ZeroMass");
REFLECTRAG_DEFINE_ERROR(NonFiniteError, Validation, "NonFinite");
REFLECTRAG_DEFINE_ERROR(EmptyOptionsError, Validation, "EmptyOptions");
REFLECTRAG_DEFINE_ERROR(BackendUnavailableError, Backend, "BackendUnavailable");
REFLECTRAG_DEFINE_ERROR(ScriptMissError, Backend, "ScriptMiss");
REFLECTRAG_DEFINE_ERROR(MalformedResponseError, Backend, "MalformedResponse");
REFLECTRAG_DEFINE_ERROR(EmptyCollectionError, Validation, "EmptyCollection");
REFLECTRAG_DEFINE_ERROR(DuplicateDocIdError, Validation, "DuplicateDocId");
REFLECTRAG_DEFINE_ERROR(EmptyStoreError, Validation, "EmptyStore");
REFLECTRAG_DEFINE_ERROR(AllCandidatesFailedError, Backend, "AllCandidatesFailed");
REFLECTRAG_DEFINE_ERROR(NoCandidatesError, Validation, "NoCandidates");
REFLECTRAG_DEFINE_ERROR(JudgeUnavailableError, Backend, "JudgeUnavailable");
REFLECTRAG_DEFINE_ERROR(EmptyCandidatesError, Validation, "EmptyCandidates");
REFLECTRAG_DEFINE_ERROR(IoError, Io, "IoError");
REFLECTRAG_DEFINE_ERROR(SchemaViolationError, Validation, "SchemaViolation");
REFLECTRAG_DEFINE_ERROR(ConfigError, Config, "ConfigError");
REFLECTRAG_DEFINE_ERROR(InvalidArgumentError, Validation, "InvalidArgument");

#undef REFLECTRAG_DEFINE_ERROR

}  // namespace reflectrag
