#pragma once

#include <stdexcept>
#include <string>

namespace sevsim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AddressOutOfRange : Error {
    using Error::Error;
};

struct UnalignedAccess : Error {
    using Error::Error;
};

struct UnalignedLength : Error {
    using Error::Error;
};

struct PayloadTooLarge : Error {
    using Error::Error;
};

struct PageCountTooSmall : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

}  // namespace sevsim
