#pragma once

#include <stdexcept>
#include <string>

namespace emrseg {

// Base for all library errors so callers can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error {
    using Error::Error;
};

struct FormatError : Error {
    using Error::Error;
};

// A note whose headings never match any canonical label.
struct NoAnchorSectionError : Error {
    using Error::Error;
};

// A note that produces zero sentences.
struct EmptyNoteError : Error {
    using Error::Error;
};

}  // namespace emrseg
