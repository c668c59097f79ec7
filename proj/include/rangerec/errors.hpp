#pragma once

#include <stdexcept>
#include <string>

namespace rangerec {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateTriple : Error {
    using Error::Error;
};

struct OutOfNeighborhood : Error {
    using Error::Error;
};

struct EmptyClass : Error {
    using Error::Error;
};

struct EmptyView : Error {
    using Error::Error;
};

struct InsufficientSupport : Error {
    using Error::Error;
};

struct DegenerateFit : Error {
    using Error::Error;
};

struct NonWatertightMesh : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

} // namespace rangerec
