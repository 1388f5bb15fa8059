#pragma once

// Forgiving HTML token stream shared by the sanitizer and the link
// enumerator. Not a DOM: tags, text, comments and doctypes in document
// order, with lowercased tag names and decoded-enough attributes.

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace triage {

struct HtmlTag {
  std::string name;  // lowercased
  std::vector<std::pair<std::string, std::string>> attrs;
  bool closing = false;
  bool self_closing = false;

  std::string attr(std::string_view attr_name) const {
    for (const auto& [n, v] : attrs) {
      if (n.size() == attr_name.size()) {
        bool eq = true;
        for (std::size_t i = 0; i < n.size(); ++i) {
          if (std::tolower(static_cast<unsigned char>(n[i])) !=
              std::tolower(static_cast<unsigned char>(attr_name[i]))) {
            eq = false;
            break;
          }
        }
        if (eq) return v;
      }
    }
    return {};
  }
};

struct HtmlText {
  std::string text;
};
struct HtmlComment {
  std::string text;
};
struct HtmlDoctype {
  std::string raw;
};

using HtmlToken = std::variant<HtmlTag, HtmlText, HtmlComment, HtmlDoctype>;

class HtmlTokenizer {
 public:
  explicit HtmlTokenizer(std::string_view input) : in_(input) {}

  std::optional<HtmlToken> next() {
    if (pos_ >= in_.size()) return std::nullopt;
    if (in_[pos_] != '<') return read_text();

    if (starts_with("<!--")) return read_comment();
    if (starts_with("<!")) return read_doctype();
    if (pos_ + 1 < in_.size() &&
        (std::isalpha(static_cast<unsigned char>(in_[pos_ + 1])) || in_[pos_ + 1] == '/'))
      return read_tag();
    return read_text();  // stray '<' treated as text
  }

 private:
  bool starts_with(std::string_view prefix) const {
    return in_.compare(pos_, prefix.size(), prefix) == 0;
  }

  HtmlToken read_text() {
    std::size_t start = pos_;
    ++pos_;  // consume at least one char (handles stray '<')
    while (pos_ < in_.size()) {
      if (in_[pos_] == '<' && pos_ + 1 < in_.size() &&
          (std::isalpha(static_cast<unsigned char>(in_[pos_ + 1])) ||
           in_[pos_ + 1] == '/' || in_[pos_ + 1] == '!'))
        break;
      ++pos_;
    }
    return HtmlText{std::string(in_.substr(start, pos_ - start))};
  }

  HtmlToken read_comment() {
    std::size_t end = in_.find("-->", pos_ + 4);
    std::string text;
    if (end == std::string_view::npos) {
      text = std::string(in_.substr(pos_ + 4));
      pos_ = in_.size();
    } else {
      text = std::string(in_.substr(pos_ + 4, end - pos_ - 4));
      pos_ = end + 3;
    }
    return HtmlComment{std::move(text)};
  }

  HtmlToken read_doctype() {
    std::size_t end = in_.find('>', pos_);
    std::string raw;
    if (end == std::string_view::npos) {
      raw = std::string(in_.substr(pos_));
      pos_ = in_.size();
    } else {
      raw = std::string(in_.substr(pos_, end - pos_ + 1));
      pos_ = end + 1;
    }
    return HtmlDoctype{std::move(raw)};
  }

  HtmlToken read_tag() {
    HtmlTag tag;
    ++pos_;  // '<'
    if (pos_ < in_.size() && in_[pos_] == '/') {
      tag.closing = true;
      ++pos_;
    }
    while (pos_ < in_.size() &&
           (std::isalnum(static_cast<unsigned char>(in_[pos_])) || in_[pos_] == '-' ||
            in_[pos_] == ':')) {
      tag.name.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(in_[pos_]))));
      ++pos_;
    }
    // Attributes until '>' (or EOF).
    while (pos_ < in_.size() && in_[pos_] != '>') {
      if (std::isspace(static_cast<unsigned char>(in_[pos_]))) {
        ++pos_;
        continue;
      }
      if (in_[pos_] == '/') {
        ++pos_;
        if (pos_ < in_.size() && in_[pos_] == '>') tag.self_closing = true;
        continue;
      }
      std::string name;
      while (pos_ < in_.size() && in_[pos_] != '=' && in_[pos_] != '>' &&
             in_[pos_] != '/' && !std::isspace(static_cast<unsigned char>(in_[pos_]))) {
        name.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(in_[pos_]))));
        ++pos_;
      }
      if (name.empty()) {
        ++pos_;
        continue;
      }
      std::string value;
      while (pos_ < in_.size() && std::isspace(static_cast<unsigned char>(in_[pos_]))) ++pos_;
      if (pos_ < in_.size() && in_[pos_] == '=') {
        ++pos_;
        while (pos_ < in_.size() && std::isspace(static_cast<unsigned char>(in_[pos_]))) ++pos_;
        if (pos_ < in_.size() && (in_[pos_] == '"' || in_[pos_] == '\'')) {
          char quote = in_[pos_++];
          while (pos_ < in_.size() && in_[pos_] != quote) value.push_back(in_[pos_++]);
          if (pos_ < in_.size()) ++pos_;  // closing quote
        } else {
          while (pos_ < in_.size() && in_[pos_] != '>' &&
                 !std::isspace(static_cast<unsigned char>(in_[pos_])))
            value.push_back(in_[pos_++]);
        }
      }
      tag.attrs.emplace_back(std::move(name), std::move(value));
    }
    if (pos_ < in_.size()) ++pos_;  // '>'
    return tag;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

// Decodes the common named entities plus numeric references.
inline std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    std::size_t semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    std::string_view ent = text.substr(i + 1, semi - i - 1);
    if (ent == "amp") out.push_back('&');
    else if (ent == "lt") out.push_back('<');
    else if (ent == "gt") out.push_back('>');
    else if (ent == "quot") out.push_back('"');
    else if (ent == "apos" || ent == "#39") out.push_back('\'');
    else if (ent == "nbsp") out.push_back(' ');
    else if (!ent.empty() && ent[0] == '#') {
      long code = 0;
      bool ok = true;
      if (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')) {
        for (std::size_t k = 2; k < ent.size(); ++k) {
          char c = ent[k];
          int d = (c >= '0' && c <= '9')   ? c - '0'
                  : (c >= 'a' && c <= 'f') ? c - 'a' + 10
                  : (c >= 'A' && c <= 'F') ? c - 'A' + 10
                                           : -1;
          if (d < 0) { ok = false; break; }
          code = code * 16 + d;
        }
      } else {
        for (std::size_t k = 1; k < ent.size(); ++k) {
          if (!std::isdigit(static_cast<unsigned char>(ent[k]))) { ok = false; break; }
          code = code * 10 + (ent[k] - '0');
        }
      }
      if (ok && code > 0 && code < 128) out.push_back(static_cast<char>(code));
      else if (ok) out.push_back('?');  // non-ASCII entities flattened
      else { out.push_back('&'); continue; }
    } else {
      out.push_back('&');
      continue;
    }
    i = semi;
  }
  return out;
}

}  // namespace triage
