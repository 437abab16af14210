#pragma once

#include <stdexcept>
#include <string>

namespace stbem {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stbem
