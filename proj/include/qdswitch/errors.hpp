#ifndef QDSWITCH_ERRORS_HPP
#define QDSWITCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qdswitch {

// Argument outside the mathematical domain of an operation
// (negative bias, Q <= 0, empty grid, s outside [0,1], ...).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Least-squares problem without a unique solution.
class degenerate_fit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Trace whose minimum is not positive, so max/min is undefined.
class degenerate_trace_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or invalid configuration. key() names the offending key.
class config_error : public std::runtime_error {
public:
    config_error(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key))
    {
    }
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// CSV ingestion failure. row() is 1-based including the header; 0 when not row-specific.
class ingest_error : public std::runtime_error {
public:
    ingest_error(std::size_t row, const std::string& what)
        : std::runtime_error(row == 0 ? what : "row " + std::to_string(row) + ": " + what), row_(row)
    {
    }
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qdswitch

#endif
