#pragma once

#include <stdexcept>
#include <string>

namespace gammafactor {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input (shape mismatch, non-finite entries, bad budget).
class InputError : public Error {
public:
    using Error::Error;
};

// The requested route does not apply to the given spaces (e.g. a Hilbert-only
// formula called on an l_p space with p != 2).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

// An enumeration would exceed its configured size limit.
class BudgetError : public Error {
public:
    using Error::Error;
};

// A black-box search produced a non-finite objective value.
class SearchError : public Error {
public:
    using Error::Error;
};

// A certificate could not be issued (domination rejected, missing sub-bound, ...).
class RefusedError : public Error {
public:
    using Error::Error;
};

// Two certified quantities contradict each other; indicates a bug upstream.
class InconsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace gammafactor
