#include <algorithm>
#include <cctype>

#include "triage/errors.hpp"
#include "triage/html_tokens.hpp"
#include "triage/preprocessor.hpp"

namespace triage {

namespace {

// Anchor text that marks boilerplate footer links, not calls-to-action.
constexpr std::string_view kFooterStoplist[] = {
    "unsubscribe", "privacy", "terms", "contact", "support", "view in browser"};

bool has_button_token(std::string_view value) {
  return icontains(value, "btn") || icontains(value, "button");
}

std::string resolve_href(std::string_view href, const std::optional<UrlParts>& base,
                         std::string_view base_raw) {
  if (href.empty()) return {};
  if (parse_url(href)) return std::string(href);  // already absolute http(s)
  if (href.find(':') != std::string_view::npos &&
      href.find(':') < href.find('/'))
    return {};  // other schemes (mailto:, tel:, javascript-neutralized "#")
  if (href.front() == '#') return {};
  if (!base) return {};

  std::string origin = base->scheme + "://" + base->host;
  if (base->port != 0) origin += ":" + std::to_string(base->port);

  if (href.rfind("//", 0) == 0) return base->scheme + ":" + std::string(href);
  if (href.front() == '/') return origin + std::string(href);

  // Path-relative: resolve against the base path's directory.
  std::string_view base_path = base->target;
  (void)base_raw;
  auto slash = base_path.rfind('/');
  std::string dir = slash == std::string_view::npos
                        ? std::string("/")
                        : std::string(base_path.substr(0, slash + 1));
  std::string_view rest = href;
  while (rest.rfind("./", 0) == 0) rest = rest.substr(2);
  while (rest.rfind("../", 0) == 0) {
    rest = rest.substr(3);
    if (dir.size() > 1) {
      auto up = dir.rfind('/', dir.size() - 2);
      dir = up == std::string::npos ? "/" : dir.substr(0, up + 1);
    }
  }
  return origin + dir + std::string(rest);
}

std::string collapse_ws(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace

std::vector<LinkCandidate> enumerate_links(const SafeHtml& safe) {
  HtmlTokenizer tok(safe.document);

  std::optional<UrlParts> base;
  std::string base_raw;

  struct OpenAnchor {
    std::string href;
    bool button_like = false;
    std::string text;
  };
  std::optional<OpenAnchor> open;
  std::string last_container_attrs;  // class+style of the innermost open element
  std::vector<std::string> container_stack;

  std::vector<LinkCandidate> out;
  auto close_anchor = [&]() {
    if (!open) return;
    std::string url = resolve_href(open->href, base, base_raw);
    if (!url.empty()) {
      LinkCandidate c;
      c.index = static_cast<int>(out.size() + 1);
      c.text = collapse_ws(decode_entities(open->text));
      c.url = std::move(url);
      c.button_like = open->button_like;
      out.push_back(std::move(c));
    }
    open.reset();
  };

  while (auto token = tok.next()) {
    if (std::holds_alternative<HtmlText>(*token)) {
      if (open) open->text += std::get<HtmlText>(*token).text;
      continue;
    }
    if (!std::holds_alternative<HtmlTag>(*token)) continue;
    const HtmlTag& tag = std::get<HtmlTag>(*token);

    if (tag.name == "base" && !tag.closing) {
      std::string href = tag.attr("href");
      if (auto parsed = parse_url(href); parsed && !base) {
        base = parsed;
        base_raw = href;
      }
      continue;
    }
    if (tag.name == "a") {
      if (!tag.closing) {
        close_anchor();  // malformed nesting: implicit close
        OpenAnchor a;
        a.href = tag.attr("href");
        a.button_like = has_button_token(tag.attr("class")) ||
                        has_button_token(tag.attr("style")) ||
                        has_button_token(last_container_attrs);
        open = std::move(a);
      } else {
        close_anchor();
      }
      continue;
    }
    if (!tag.closing && !tag.self_closing) {
      last_container_attrs = tag.attr("class") + " " + tag.attr("style");
      container_stack.push_back(last_container_attrs);
    } else if (tag.closing && !container_stack.empty()) {
      container_stack.pop_back();
      last_container_attrs = container_stack.empty() ? "" : container_stack.back();
    }
  }
  close_anchor();

  // Prominence order: longer visible text first, document order breaking ties.
  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out[a].text.size() > out[b].text.size();
  });
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    out[order[rank]].area_rank = static_cast<int>(rank + 1);
  return out;
}

std::string build_cta_prompt(const std::vector<LinkCandidate>& candidates) {
  if (candidates.empty())
    throw NoCandidatesError("build_cta_prompt: no candidate links");
  std::string prompt =
      "Analyze the provided email image. Below is a list of candidate URLs found "
      "in the email's HTML.\n"
      "Your task is to identify the primary Call-To-Action (CTA) link. The CTA is "
      "the main link the email wants the user to click, often styled as a "
      "prominent button.\n"
      "\n"
      "Candidate Links:\n";
  auto quote = [](std::string_view s) {
    std::string out;
    for (char c : s) {
      if (c == '"') out += "\\\"";
      else if (c == '\n' || c == '\r') out.push_back(' ');
      else out.push_back(c);
    }
    return out;
  };
  for (const auto& c : candidates) {
    prompt += std::to_string(c.index) + ". TEXT: \"" + quote(c.text) + "\" - URL: \"" +
              quote(c.url) + "\"\n";
  }
  prompt +=
      "\n"
      "Based on the image, which link is the primary CTA?\n"
      "Respond with the number of the link from the list above. Only respond with "
      "the number.";
  return prompt;
}

namespace {

int heuristic_cta(const std::vector<LinkCandidate>& candidates) {
  auto keep = [](const LinkCandidate& c) {
    for (auto stop : kFooterStoplist)
      if (icontains(c.text, stop)) return false;
    return true;
  };
  std::vector<const LinkCandidate*> pool;
  for (const auto& c : candidates)
    if (keep(c)) pool.push_back(&c);
  if (pool.empty())
    for (const auto& c : candidates) pool.push_back(&c);

  const LinkCandidate* best = pool.front();
  for (const LinkCandidate* c : pool) {
    if (c->button_like != best->button_like) {
      if (c->button_like) best = c;
      continue;
    }
    if (c->area_rank != best->area_rank) {
      if (c->area_rank < best->area_rank) best = c;
      continue;
    }
    // Equal hints: document order wins (pool is already in document order).
  }
  return best->index;
}

std::optional<int> parse_index_reply(std::string_view reply, std::size_t n) {
  std::size_t i = 0;
  while (i < reply.size() && !std::isdigit(static_cast<unsigned char>(reply[i]))) ++i;
  if (i == reply.size()) return std::nullopt;
  long v = 0;
  while (i < reply.size() && std::isdigit(static_cast<unsigned char>(reply[i]))) {
    v = v * 10 + (reply[i] - '0');
    if (v > 1000000) return std::nullopt;
    ++i;
  }
  if (v < 1 || static_cast<std::size_t>(v) > n) return std::nullopt;
  return static_cast<int>(v);
}

}  // namespace

int select_cta(const SafeHtml& safe, const std::vector<LinkCandidate>& candidates,
               VisualSelector* backend) {
  if (candidates.empty()) throw NoCandidatesError("select_cta: no candidate links");
  if (candidates.size() == 1) return 1;
  if (backend) {
    std::string reply = backend->choose(safe, build_cta_prompt(candidates));
    if (auto idx = parse_index_reply(reply, candidates.size())) return *idx;
    // Out-of-range or non-numeric reply: deterministic fallback.
  }
  return heuristic_cta(candidates);
}

}  // namespace triage
