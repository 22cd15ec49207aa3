#pragma once

#include <stdexcept>
#include <string>

namespace mgp {

// Base class for everything thrown by this library.  Callers that want a
// single catch site can catch mgp::error; the concrete types below exist so
// tests and the CLI can map failures to distinct exit codes.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// numerical failures

class not_positive_definite : public error {
 public:
  explicit not_positive_definite(const std::string& msg) : error(msg) {}
};

class non_finite : public error {
 public:
  explicit non_finite(const std::string& msg) : error(msg) {}
};

class no_convergence : public error {
 public:
  explicit no_convergence(const std::string& msg) : error(msg) {}
};

class zero_variance : public error {
 public:
  explicit zero_variance(const std::string& msg) : error(msg) {}
};

// structural problems (bad shapes, bad configuration)

class dimension_mismatch : public error {
 public:
  explicit dimension_mismatch(const std::string& msg) : error(msg) {}
};

class invalid_argument : public error {
 public:
  explicit invalid_argument(const std::string& msg) : error(msg) {}
};

// data problems

class data_error : public error {
 public:
  explicit data_error(const std::string& msg) : error(msg) {}
};

class parse_error : public data_error {
 public:
  explicit parse_error(const std::string& msg) : data_error(msg) {}
};

class duplicate_timestamp : public data_error {
 public:
  explicit duplicate_timestamp(const std::string& msg) : data_error(msg) {}
};

class empty_data : public data_error {
 public:
  explicit empty_data(const std::string& msg) : data_error(msg) {}
};

class degenerate_data : public data_error {
 public:
  explicit degenerate_data(const std::string& msg) : data_error(msg) {}
};

class empty_training : public data_error {
 public:
  explicit empty_training(const std::string& msg) : data_error(msg) {}
};

class empty_holdout : public data_error {
 public:
  explicit empty_holdout(const std::string& msg) : data_error(msg) {}
};

}  // namespace mgp
