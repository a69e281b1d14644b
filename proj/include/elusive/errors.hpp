#pragma once

#include <stdexcept>
#include <string>

namespace elusive {

/** Base class of every error raised by the toolkit. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionViolation : public Error {
public:
    using Error::Error;
};

class FactorizationTimeout : public Error {
public:
    using Error::Error;
};

class InvalidParameters : public Error {
public:
    using Error::Error;
};

class UnsupportedSubgroupType : public Error {
public:
    using Error::Error;
};

class UnsupportedCountingCase : public Error {
public:
    using Error::Error;
};

class FormulaMismatch : public Error {
public:
    using Error::Error;
};

class PartitionDimensionMismatch : public Error {
public:
    using Error::Error;
};

class UnknownCase : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class UnsupportedConstruction : public Error {
public:
    using Error::Error;
};

class UnsupportedLabelShape : public Error {
public:
    using Error::Error;
};

class DomainTooLarge : public Error {
public:
    using Error::Error;
};

class DegreeTooLarge : public Error {
public:
    using Error::Error;
};

class NotASubgroup : public Error {
public:
    using Error::Error;
};

class IndexTooLarge : public Error {
public:
    using Error::Error;
};

class GroupTooLarge : public Error {
public:
    using Error::Error;
};

class NotNormal : public Error {
public:
    using Error::Error;
};

class NotTransitive : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

} // namespace elusive
