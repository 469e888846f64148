#include "utrad/classify/serial.hpp"

#include <charconv>

#include "utrad/common/csv.hpp"
#include "utrad/common/error.hpp"

namespace utrad::ml {

Writer& Writer::tag(std::string_view t) {
  if (!line_start_) out_ << '\n';
  out_ << t;
  line_start_ = false;
  return *this;
}

Writer& Writer::put(std::string_view s) {
  if (s.empty() || s.find_first_of(" \t\r\n") != std::string_view::npos) {
    throw PreconditionError("artifact token must be a nonempty word: '" + std::string(s) + "'");
  }
  out_ << (line_start_ ? "" : " ") << s;
  line_start_ = false;
  return *this;
}

Writer& Writer::put(double v) { return put(std::string_view(csv::format_double(v))); }
Writer& Writer::put(std::uint64_t v) { return put(std::string_view(std::to_string(v))); }
Writer& Writer::put(std::int64_t v) { return put(std::string_view(std::to_string(v))); }

Writer& Writer::put(const Eigen::VectorXd& v) {
  put(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) put(v(i));
  return *this;
}

Writer& Writer::put(const Eigen::MatrixXd& m) {
  put(static_cast<std::uint64_t>(m.rows()));
  put(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put(m(r, c));
  }
  return *this;
}

Writer& Writer::put_indices(const std::vector<std::size_t>& v) {
  put(static_cast<std::uint64_t>(v.size()));
  for (auto i : v) put(static_cast<std::uint64_t>(i));
  return *this;
}

std::string Reader::word() {
  std::string t;
  if (!(in_ >> t)) throw InputError("model artifact truncated");
  return t;
}

void Reader::expect(std::string_view t) {
  const std::string got = word();
  if (got != t) {
    throw InputError("model artifact: expected '" + std::string(t) + "', found '" + got + "'");
  }
}

namespace {

template <typename T>
T parse_number(const std::string& t) {
  T v{};
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) {
    throw InputError("model artifact: bad number '" + t + "'");
  }
  return v;
}

}  // namespace

double Reader::real() { return parse_number<double>(word()); }
std::uint64_t Reader::u64() { return parse_number<std::uint64_t>(word()); }
std::int64_t Reader::i64() { return parse_number<std::int64_t>(word()); }

Eigen::VectorXd Reader::vector() {
  const auto n = static_cast<Eigen::Index>(u64());
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = real();
  return v;
}

Eigen::MatrixXd Reader::matrix() {
  const auto r = static_cast<Eigen::Index>(u64());
  const auto c = static_cast<Eigen::Index>(u64());
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = real();
  }
  return m;
}

std::vector<std::size_t> Reader::indices() {
  std::vector<std::size_t> v(u64());
  for (auto& i : v) i = u64();
  return v;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace utrad::ml
