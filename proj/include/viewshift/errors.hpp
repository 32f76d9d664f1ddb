#pragma once

#include <stdexcept>
#include <string>

namespace viewshift {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by bad input data or arguments. The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

#define VIEWSHIFT_INPUT_ERROR(Name)     \
  class Name : public InputError {      \
   public:                              \
    using InputError::InputError;       \
  }

VIEWSHIFT_INPUT_ERROR(ParseError);
VIEWSHIFT_INPUT_ERROR(EmptyCorpus);
VIEWSHIFT_INPUT_ERROR(EmptySample);
VIEWSHIFT_INPUT_ERROR(DomainError);
VIEWSHIFT_INPUT_ERROR(InsufficientTail);
VIEWSHIFT_INPUT_ERROR(MissingStreamDetail);
VIEWSHIFT_INPUT_ERROR(SchemaMismatch);
VIEWSHIFT_INPUT_ERROR(EmptyDataset);
VIEWSHIFT_INPUT_ERROR(ArityMismatch);
VIEWSHIFT_INPUT_ERROR(DegenerateData);
VIEWSHIFT_INPUT_ERROR(InsufficientRows);
VIEWSHIFT_INPUT_ERROR(UnknownFeature);
VIEWSHIFT_INPUT_ERROR(ConfigError);
VIEWSHIFT_INPUT_ERROR(AuthError);

#undef VIEWSHIFT_INPUT_ERROR

/// Network failure or HTTP 5xx from the metadata service.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Opens `path` for reading or throws InputError naming the file.
std::string read_text_file(const std::string& path);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace viewshift
