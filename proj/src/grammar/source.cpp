#include <algorithm>
#include <fstream>
#include <sstream>

#include "pscript/grammar.hpp"

namespace pscript {

SourceText::SourceText(std::string raw) : raw_(std::move(raw)) {
  line_index_.push_back(0);
  for (std::size_t i = 0; i < raw_.size(); ++i) {
    if (raw_[i] == '\n' && i + 1 < raw_.size()) line_index_.push_back(i + 1);
  }
}

int SourceText::line_of(std::size_t offset) const {
  auto it = std::upper_bound(line_index_.begin(), line_index_.end(), offset);
  return static_cast<int>(it - line_index_.begin());
}

std::string_view SourceText::line(int n) const {
  if (n < 1 || n > line_count()) return {};
  std::size_t begin = line_index_[n - 1];
  std::size_t end = n < line_count() ? line_index_[n] : raw_.size();
  std::string_view v(raw_.data() + begin, end - begin);
  while (!v.empty() && (v.back() == '\n' || v.back() == '\r')) v.remove_suffix(1);
  return v;
}

SourceText load_source_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return SourceText(ss.str());
}

}  // namespace pscript
