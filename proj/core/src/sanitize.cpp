#include <algorithm>
#include <cctype>

#include "triage/errors.hpp"
#include "triage/html_tokens.hpp"
#include "triage/preprocessor.hpp"

namespace triage {

namespace {

constexpr std::string_view kInertUrl = "data:,";

bool is_void_element(std::string_view tag) {
  static constexpr std::string_view kVoid[] = {"area",  "base", "br",    "col",  "embed",
                                               "hr",    "img",  "input", "link", "meta",
                                               "param", "source", "track", "wbr"};
  for (auto v : kVoid)
    if (tag == v) return true;
  return false;
}

bool is_remote_loader(std::string_view tag) {
  static constexpr std::string_view kLoaders[] = {"img",   "iframe", "frame", "embed",
                                                  "object", "source", "audio", "video",
                                                  "track"};
  for (auto v : kLoaders)
    if (tag == v) return true;
  return false;
}

bool is_js_url(std::string_view value) {
  std::size_t i = 0;
  while (i < value.size() && std::isspace(static_cast<unsigned char>(value[i]))) ++i;
  std::string_view rest = value.substr(i);
  return rest.size() >= 11 && iequals(rest.substr(0, 11), "javascript:");
}

// Replaces every url(...) whose target is not already inert with url(data:,).
std::string neutralize_css_urls(std::string_view css, std::size_t& replaced) {
  std::string out;
  out.reserve(css.size());
  std::size_t i = 0;
  while (i < css.size()) {
    if (i + 4 <= css.size() && iequals(css.substr(i, 4), "url(")) {
      std::size_t close = css.find(')', i + 4);
      if (close == std::string_view::npos) {
        out += "url(";
        out += kInertUrl;
        ++replaced;
        i = css.size();
        break;
      }
      std::string_view target = trim(css.substr(i + 4, close - i - 4));
      if (target.size() >= 2 && (target.front() == '"' || target.front() == '\''))
        target = trim(target.substr(1, target.size() - 2));
      if (target == kInertUrl) {
        out += "url(";
        out += kInertUrl;
        out += ')';
      } else {
        out += "url(";
        out += kInertUrl;
        out += ')';
        ++replaced;
      }
      i = close + 1;
    } else {
      out.push_back(css[i]);
      ++i;
    }
  }
  return out;
}

void emit_tag(std::string& out, const HtmlTag& tag) {
  out.push_back('<');
  if (tag.closing) out.push_back('/');
  out += tag.name;
  for (const auto& [name, value] : tag.attrs) {
    out.push_back(' ');
    out += name;
    out += "=\"";
    for (char c : value) {
      if (c == '"')
        out += "&quot;";
      else
        out.push_back(c);
    }
    out.push_back('"');
  }
  if (tag.self_closing) out.push_back('/');
  out.push_back('>');
}

}  // namespace

SafeHtml sanitize(std::string_view html) {
  SafeHtml safe;
  auto tally = [&](const char* kind, std::size_t n = 1) {
    if (n > 0) safe.removals[kind] += n;
  };

  HtmlTokenizer tok(html);
  std::string out;
  out.reserve(html.size());
  int depth = 0;
  bool skipping_script = false;  // inside <script>...</script>

  while (auto token = tok.next()) {
    if (std::holds_alternative<HtmlText>(*token)) {
      if (!skipping_script) out += std::get<HtmlText>(*token).text;
      continue;
    }
    if (std::holds_alternative<HtmlComment>(*token)) continue;  // comments dropped
    if (std::holds_alternative<HtmlDoctype>(*token)) {
      out += std::get<HtmlDoctype>(*token).raw;
      continue;
    }

    HtmlTag tag = std::get<HtmlTag>(*token);

    if (skipping_script) {
      if (tag.closing && tag.name == "script") skipping_script = false;
      continue;
    }
    if (tag.name == "script") {
      if (!tag.closing) {
        tally("script");
        if (!tag.self_closing) skipping_script = true;
      }
      continue;
    }
    if (tag.name == "meta" && !tag.closing) {
      bool refresh = false;
      for (const auto& [name, value] : tag.attrs)
        if (iequals(name, "http-equiv") && icontains(value, "refresh")) refresh = true;
      if (refresh) {
        tally("remote_load");
        continue;
      }
    }
    if (tag.name == "link" && !tag.closing) {
      // Stylesheet and preload links reach the network; make the href inert.
      for (auto& [name, value] : tag.attrs) {
        if (iequals(name, "href") && value != kInertUrl) {
          value = std::string(kInertUrl);
          tally("remote_load");
        }
      }
    }

    if (!tag.closing) {
      std::vector<std::pair<std::string, std::string>> kept;
      kept.reserve(tag.attrs.size());
      for (auto& [name, value] : tag.attrs) {
        std::string lname = to_lower(name);
        if (lname.size() > 2 && lname.rfind("on", 0) == 0) {
          tally("event_handler");
          continue;
        }
        if (lname == "srcset") {
          tally("remote_load");
          continue;
        }
        if (lname == "action" || lname == "formaction") {
          tally("form_action");
          continue;
        }
        if ((lname == "href" || lname == "src" || lname == "background") &&
            is_js_url(value)) {
          tally("js_url");
          kept.emplace_back(name, "#");
          continue;
        }
        if (lname == "src" && is_remote_loader(tag.name) && value != kInertUrl) {
          tally("remote_load");
          kept.emplace_back(name, std::string(kInertUrl));
          continue;
        }
        if (lname == "background" && value != kInertUrl) {
          tally("remote_load");
          kept.emplace_back(name, std::string(kInertUrl));
          continue;
        }
        if (lname == "style") {
          std::size_t replaced = 0;
          std::string neutral = neutralize_css_urls(value, replaced);
          tally("remote_load", replaced);
          kept.emplace_back(name, std::move(neutral));
          continue;
        }
        kept.emplace_back(name, value);
      }
      tag.attrs = std::move(kept);
    }

    if (tag.name == "style" && !tag.closing && !tag.self_closing) {
      // Neutralize url() loads inside the style block but keep the CSS text.
      emit_tag(out, tag);
      std::string css;
      while (auto inner = tok.next()) {
        if (std::holds_alternative<HtmlText>(*inner)) {
          css += std::get<HtmlText>(*inner).text;
          continue;
        }
        if (std::holds_alternative<HtmlTag>(*inner)) {
          const HtmlTag& it = std::get<HtmlTag>(*inner);
          if (it.closing && it.name == "style") break;
        }
        // Anything else inside <style> is treated as raw text and dropped.
      }
      std::size_t replaced = 0;
      out += neutralize_css_urls(css, replaced);
      tally("remote_load", replaced);
      out += "</style>";
      continue;
    }

    if (!tag.closing && !tag.self_closing && !is_void_element(tag.name)) {
      ++depth;
      if (depth > 512) throw DepthError("sanitize: element nesting exceeds 512");
    } else if (tag.closing) {
      if (depth > 0) --depth;
    }
    emit_tag(out, tag);
  }

  safe.document = std::move(out);
  return safe;
}

std::string html_to_text(std::string_view html) {
  HtmlTokenizer tok(html);
  std::string text;
  bool skipping = false;
  auto block_break = [&]() {
    if (!text.empty() && text.back() != '\n') text.push_back('\n');
  };
  while (auto token = tok.next()) {
    if (std::holds_alternative<HtmlText>(*token)) {
      if (skipping) continue;
      std::string decoded = decode_entities(std::get<HtmlText>(*token).text);
      // Collapse runs of whitespace to single spaces.
      for (char c : decoded) {
        if (std::isspace(static_cast<unsigned char>(c))) {
          if (!text.empty() && text.back() != ' ' && text.back() != '\n')
            text.push_back(' ');
        } else {
          text.push_back(c);
        }
      }
      continue;
    }
    if (!std::holds_alternative<HtmlTag>(*token)) continue;
    const HtmlTag& tag = std::get<HtmlTag>(*token);
    if (tag.name == "script" || tag.name == "style") {
      skipping = !tag.closing;
      continue;
    }
    static constexpr std::string_view kBlocks[] = {"p",  "div", "br", "li", "tr", "h1",
                                                   "h2", "h3",  "h4", "h5", "h6", "table",
                                                   "ul", "ol"};
    for (auto b : kBlocks) {
      if (tag.name == b) {
        block_break();
        break;
      }
    }
  }
  // Trim trailing whitespace on each line and overall.
  std::string out;
  for (auto line : split(text, '\n')) {
    auto t = trim(line);
    if (!t.empty()) {
      out += std::string(t);
      out.push_back('\n');
    }
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

}  // namespace triage
