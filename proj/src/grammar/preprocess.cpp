#include <algorithm>
#include <cctype>
#include <regex>
#include <string>

#include "pscript/grammar.hpp"
#include "section_names.hpp"

namespace pscript {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Removes comments, keeping every newline so line numbers survive.
std::string strip_comments(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  int depth = 0;
  int line = 1;
  int open_line = 0;
  for (char c : raw) {
    if (c == '(') {
      if (depth == 0) open_line = line;
      ++depth;
    } else if (c == ')') {
      if (depth == 0) {
        throw CompileError("", line, "unbalanced ')' outside of a comment");
      }
      --depth;
    } else if (c == '\n') {
      out.push_back(c);
      ++line;
    } else if (depth == 0) {
      out.push_back(c);
    }
  }
  if (depth != 0) {
    throw CompileError("", open_line, "unterminated comment");
  }
  return out;
}

// Lower-cases `line` but keeps anything after a `message` token verbatim.
std::string lower_keep_message(const std::string& line) {
  std::string lowered = lower(line);
  static const std::regex kMessage(R"((^|\s)message(\s|$))");
  std::smatch m;
  if (std::regex_search(lowered, m, kMessage)) {
    std::size_t text_start = static_cast<std::size_t>(m.position(0) + m.length(0));
    return lowered.substr(0, text_start) + line.substr(text_start);
  }
  return lowered;
}

std::string normalize_rule_line(std::string line) {
  static const std::regex kBarBetweenKernels(R"(\]\s*\|\s*\[)");
  static const std::regex kEllipsisBetweenKernels(R"(\]\s*\.\.\.\s*\[)");
  line = std::regex_replace(line, kBarBetweenKernels, "] [");
  line = std::regex_replace(line, kEllipsisBetweenKernels, "| ... |");
  return line;
}

}  // namespace

SourceText preprocess(const SourceText& source) {
  std::string text = strip_comments(source.raw());
  std::string out;
  out.reserve(text.size());

  Section section = Section::kPrelude;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    bool has_nl = nl != std::string::npos;
    std::string line = text.substr(pos, has_nl ? nl - pos : std::string::npos);

    std::string trimmed = lower(trim(line));
    if (auto header = section_from_header(trimmed)) {
      section = *header;
      out += lower(line);
    } else if (section == Section::kPrelude) {
      // Keys are case-insensitive; titles and author names keep their case.
      std::size_t start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos) {
        out += line;
      } else {
        std::size_t end = line.find_first_of(" \t\r", start);
        if (end == std::string::npos) end = line.size();
        out += line.substr(0, start) + lower(line.substr(start, end - start)) +
               line.substr(end);
      }
    } else if (section == Section::kRules) {
      out += normalize_rule_line(lower_keep_message(line));
    } else if (section == Section::kLevels) {
      out += lower_keep_message(line);
    } else {
      out += lower(line);
    }
    if (!has_nl) break;
    out.push_back('\n');
    pos = nl + 1;
  }
  return SourceText(std::move(out));
}

}  // namespace pscript
