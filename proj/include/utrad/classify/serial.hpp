#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace utrad::ml {

/// Whitespace-separated token stream for model artifacts. Doubles use the
/// shortest round-trip form, so save -> load -> save is byte-stable.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  Writer& tag(std::string_view t);  // starts a new line
  Writer& put(std::string_view s);
  Writer& put(double v);
  Writer& put(std::uint64_t v);
  Writer& put(std::int64_t v);
  Writer& put(int v) { return put(static_cast<std::int64_t>(v)); }
  Writer& put(const Eigen::VectorXd& v);
  Writer& put(const Eigen::MatrixXd& m);
  Writer& put_indices(const std::vector<std::size_t>& v);

 private:
  std::ostream& out_;
  bool line_start_ = true;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Reads the next token and throws InputError unless it equals `t`.
  void expect(std::string_view t);
  std::string word();
  double real();
  std::uint64_t u64();
  std::int64_t i64();
  int integer() { return static_cast<int>(i64()); }
  Eigen::VectorXd vector();
  Eigen::MatrixXd matrix();
  std::vector<std::size_t> indices();

 private:
  std::istream& in_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace utrad::ml
