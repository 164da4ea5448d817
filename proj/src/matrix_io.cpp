#include "invlr/matrix_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "invlr/error.hpp"

namespace invlr {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_matrix(const Matrix& m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ' ';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  void skip_spaces() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }

  void expect_newline(std::size_t line) {
    skip_spaces();
    if (pos_ < text_.size() && text_[pos_] == '\n') {
      ++pos_;
      return;
    }
    if (pos_ == text_.size()) return;
    throw Error(ErrorCode::Io, "line " + std::to_string(line) + ": unexpected trailing data");
  }

  template <class T>
  T number(std::size_t line) {
    skip_spaces();
    T value{};
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    if (begin < end && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc()) {
      throw Error(ErrorCode::Io, "line " + std::to_string(line) + ": expected a number");
    }
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    return value;
  }

  bool at_end() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return pos_ == text_.size();
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Matrix parse_matrix(std::string_view text) {
  Cursor cur(text);
  const long rows = cur.number<long>(1);
  const long cols = cur.number<long>(1);
  if (rows < 0 || cols < 0) throw Error(ErrorCode::Io, "negative matrix dimensions");
  cur.expect_newline(1);
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const auto line = static_cast<std::size_t>(i + 2);
    for (long j = 0; j < cols; ++j) {
      m(i, j) = cur.number<double>(line);
      if (!std::isfinite(m(i, j))) throw Error(ErrorCode::Io, "line " + std::to_string(line) + ": non-finite entry");
    }
    cur.expect_newline(line);
  }
  if (!cur.at_end()) throw Error(ErrorCode::Io, "more rows than the header declares");
  return m;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << format_matrix(m);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_matrix(buf.str());
  } catch (const Error& e) {
    throw Error(ErrorCode::Io, path.string() + ": " + e.what());
  }
}

}  // namespace invlr
