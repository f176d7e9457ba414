#pragma once

#include <stdexcept>
#include <string>

namespace openmetrics {

// Base for all library errors. Subclasses mirror the failure modes of the
// individual components so callers can map them onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// file-level
struct MissingFile : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// parsers
struct MalformedLine : Error {
  MalformedLine(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what) {}
};
struct SchemaError : Error { using Error::Error; };
struct DanglingReference : Error { using Error::Error; };

// taxonomy / similarity
struct UnknownSynset : Error { using Error::Error; };
struct UnresolvableLabel : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// rasters / masks
struct ShapeMismatch : Error { using Error::Error; };
struct SizeMismatch : Error { using Error::Error; };
struct InvalidId : Error { using Error::Error; };

// codecs
struct BadMagic : Error { using Error::Error; };
struct BadVersion : Error { using Error::Error; };
struct TruncatedPayload : Error { using Error::Error; };
struct BadCounts : Error { using Error::Error; };
struct BadChar : Error { using Error::Error; };
struct Overflow : Error { using Error::Error; };

}  // namespace openmetrics
