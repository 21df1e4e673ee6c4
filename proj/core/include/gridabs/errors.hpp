/*
 * errors.hpp
 *
 * exception types thrown by the gridabs core library
 */
#pragma once

#include <stdexcept>
#include <string>

namespace gridabs {

/* bad shapes, out-of-range values, violated preconditions */
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/* a computed quantity left the range of double */
class OverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/* the hyperplane V_gamma does not meet the box */
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/* the objective blew up while minimizing */
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/* the nominal flow became non-finite */
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/* failure while writing a transition file */
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gridabs
