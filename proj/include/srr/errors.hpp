// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace srr {

/// Root of every error raised by the library. The CLI maps subclasses onto
/// process exit codes, so new error kinds should derive from the closest
/// existing category rather than from Error directly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input / format faults.
class ParseError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class SchemaError : public Error { using Error::Error; };
class MissingFileError : public Error { using Error::Error; };
class DuplicateIdError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class VersionError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class EmptyDatasetError : public Error { using Error::Error; };

// Missing credentials, empty knowledge base and similar operator faults.
class ConfigError : public Error { using Error::Error; };

// Vector math.
class DimensionMismatchError : public Error { using Error::Error; };
class ZeroVectorError : public Error { using Error::Error; };
class EmbeddingError : public Error { using Error::Error; };

// Model services.
class ProviderError : public Error { using Error::Error; };
// Failures that may succeed on another attempt: refused connections, 429, 5xx.
class TransientProviderError : public ProviderError { using ProviderError::ProviderError; };
class TimeoutError : public TransientProviderError { using TransientProviderError::TransientProviderError; };
class ReplayMissError : public ProviderError { using ProviderError::ProviderError; };
class ContextOverflowError : public Error { using Error::Error; };
class AgentError : public Error { using Error::Error; };
class MalformedAgentOutputError : public Error { using Error::Error; };

}  // namespace srr
