#include <algorithm>
#include <cctype>

#include "triage/errors.hpp"
#include "triage/preprocessor.hpp"

namespace triage {

namespace {

struct RawPart {
  std::vector<Header> headers;
  std::string body;
};

std::string header_get(const std::vector<Header>& headers, std::string_view name) {
  for (const auto& h : headers)
    if (iequals(h.name, name)) return h.value;
  return {};
}

// Splits "type/subtype; param=value; ..." into the media type and params.
struct ContentType {
  std::string type;  // lowercased "type/subtype"
  std::map<std::string, std::string> params;
};

ContentType parse_content_type(std::string_view value) {
  ContentType ct;
  auto parts = split(value, ';');
  if (!parts.empty()) ct.type = to_lower(trim(parts[0]));
  for (std::size_t i = 1; i < parts.size(); ++i) {
    auto part = trim(parts[i]);
    auto eq = part.find('=');
    if (eq == std::string_view::npos) continue;
    std::string key = to_lower(trim(part.substr(0, eq)));
    std::string_view val = trim(part.substr(eq + 1));
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
      val = val.substr(1, val.size() - 2);
    ct.params[key] = std::string(val);
  }
  return ct;
}

// Header section ends at the first empty line. Continuation lines (leading
// whitespace) are unfolded. Returns false when no empty-line separator exists.
bool split_headers(std::string_view raw, std::vector<Header>& headers, std::string& body) {
  std::size_t pos = 0;
  std::string pending_name, pending_value;
  auto flush = [&]() {
    if (!pending_name.empty())
      headers.push_back(Header{pending_name, std::string(trim(pending_value))});
    pending_name.clear();
    pending_value.clear();
  };
  while (pos <= raw.size()) {
    std::size_t eol = raw.find('\n', pos);
    std::string_view line;
    std::size_t next;
    if (eol == std::string_view::npos) {
      line = raw.substr(pos);
      next = raw.size() + 1;
    } else {
      line = raw.substr(pos, eol - pos);
      next = eol + 1;
    }
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      flush();
      if (eol == std::string_view::npos) return false;  // headers never terminated
      body = std::string(raw.substr(next));
      return true;
    }
    if (line.front() == ' ' || line.front() == '\t') {
      if (pending_name.empty()) return false;  // continuation before any header
      pending_value += ' ';
      pending_value += trim(line);
    } else {
      flush();
      auto colon = line.find(':');
      if (colon == std::string_view::npos) return false;
      pending_name = std::string(trim(line.substr(0, colon)));
      pending_value = std::string(trim(line.substr(colon + 1)));
      if (pending_name.empty()) return false;
    }
    pos = next;
    if (eol == std::string_view::npos) break;
  }
  return false;  // ran out of input before the blank separator
}

std::string decode_quoted_printable(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '=') {
      out.push_back(c);
      continue;
    }
    if (i + 1 < text.size() && (text[i + 1] == '\n' ||
                                (text[i + 1] == '\r' && i + 2 < text.size() &&
                                 text[i + 2] == '\n'))) {
      i += text[i + 1] == '\r' ? 2 : 1;  // soft line break
      continue;
    }
    auto nib = [](char ch) -> int {
      if (ch >= '0' && ch <= '9') return ch - '0';
      if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
      if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
      return -1;
    };
    if (i + 2 < text.size()) {
      int hi = nib(text[i + 1]), lo = nib(text[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>((hi << 4) | lo));
        i += 2;
        continue;
      }
    }
    out.push_back(c);
  }
  return out;
}

std::string decode_body(const std::vector<Header>& headers, const std::string& body) {
  std::string enc = to_lower(trim(header_get(headers, "Content-Transfer-Encoding")));
  if (enc == "base64") {
    if (auto bytes = base64_decode(body))
      return std::string(bytes->begin(), bytes->end());
    return body;
  }
  if (enc == "quoted-printable") return decode_quoted_printable(body);
  return body;  // 7bit/8bit/binary/unset
}

// RFC 2047 encoded words in Subject/From display text: =?charset?B|Q?...?=
std::string decode_encoded_words(std::string_view value) {
  std::string out;
  std::size_t pos = 0;
  while (pos < value.size()) {
    auto start = value.find("=?", pos);
    if (start == std::string_view::npos) {
      out += value.substr(pos);
      break;
    }
    auto c1 = value.find('?', start + 2);
    auto c2 = c1 == std::string_view::npos ? c1 : value.find('?', c1 + 1);
    auto end = c2 == std::string_view::npos ? c2 : value.find("?=", c2 + 1);
    if (end == std::string_view::npos) {
      out += value.substr(pos);
      break;
    }
    std::string between(value.substr(pos, start - pos));
    // Whitespace between adjacent encoded words is dropped per RFC 2047.
    if (!(out.size() && trim(between).empty())) out += between;
    char kind = static_cast<char>(std::toupper(static_cast<unsigned char>(value[c1 + 1])));
    std::string_view payload = value.substr(c2 + 1, end - c2 - 1);
    if (kind == 'B') {
      if (auto bytes = base64_decode(payload))
        out.append(bytes->begin(), bytes->end());
    } else if (kind == 'Q') {
      std::string q(payload);
      std::replace(q.begin(), q.end(), '_', ' ');
      out += decode_quoted_printable(q);
    } else {
      out += value.substr(start, end + 2 - start);
    }
    pos = end + 2;
  }
  return out;
}

std::string extract_addr_spec(std::string_view from_value) {
  auto lt = from_value.find('<');
  auto gt = from_value.find('>', lt == std::string_view::npos ? 0 : lt);
  if (lt != std::string_view::npos && gt != std::string_view::npos && gt > lt)
    return std::string(trim(from_value.substr(lt + 1, gt - lt - 1)));
  return std::string(trim(from_value));
}

// Recursively walks a part tree collecting the preferred bodies.
void collect_bodies(const RawPart& part, int depth, std::optional<std::string>& html,
                    std::optional<std::string>& text) {
  if (depth > 16) throw ParseError("eml: MIME nesting too deep");
  ContentType ct = parse_content_type(header_get(part.headers, "Content-Type"));
  std::string type = ct.type.empty() ? "text/plain" : ct.type;

  if (type.rfind("multipart/", 0) == 0) {
    auto it = ct.params.find("boundary");
    if (it == ct.params.end()) throw ParseError("eml: multipart without boundary");
    const std::string delim = "--" + it->second;
    std::vector<std::string> chunks;
    std::size_t pos = 0;
    bool terminated = false;
    bool in_part = false;
    std::size_t part_start = 0;
    while (pos <= part.body.size()) {
      std::size_t eol = part.body.find('\n', pos);
      std::string_view line(part.body.data() + pos,
                            (eol == std::string::npos ? part.body.size() : eol) - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line == delim || line == delim + "--") {
        if (in_part) {
          std::size_t part_end = pos;
          chunks.emplace_back(part.body.substr(part_start, part_end - part_start));
        }
        if (line == delim + "--") {
          terminated = true;
          break;
        }
        in_part = true;
        part_start = eol == std::string::npos ? part.body.size() : eol + 1;
      }
      if (eol == std::string::npos) break;
      pos = eol + 1;
    }
    if (!terminated) throw ParseError("eml: multipart body missing closing boundary");
    for (const auto& chunk : chunks) {
      RawPart sub;
      if (!split_headers(chunk, sub.headers, sub.body)) {
        // A part may legally omit headers entirely (defaults to text/plain).
        sub.headers.clear();
        sub.body = chunk;
      }
      collect_bodies(sub, depth + 1, html, text);
    }
    return;
  }

  std::string decoded = decode_body(part.headers, part.body);
  if (type == "text/html") {
    if (!html) html = std::move(decoded);
  } else if (type == "text/plain") {
    if (!text) text = std::move(decoded);
  }
}

}  // namespace

EmailDoc parse_eml(std::string_view bytes) {
  if (trim(bytes).empty()) throw ParseError("eml: empty input");
  RawPart root;
  if (!split_headers(bytes, root.headers, root.body))
    throw ParseError("eml: truncated or malformed header section");
  if (root.headers.empty()) throw ParseError("eml: no headers");

  EmailDoc doc;
  doc.headers = root.headers;
  doc.subject = decode_encoded_words(header_get(root.headers, "Subject"));
  doc.from_address = extract_addr_spec(header_get(root.headers, "From"));

  collect_bodies(root, 0, doc.body_html, doc.body_text);
  if (!doc.body_html && !doc.body_text)
    throw EmptyBodyError("eml: message has no text or html body");
  return doc;
}

Persona parse_persona_file(std::string_view text) {
  Persona p = Persona::default_persona();
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    std::string key = to_lower(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key == "full_name") p.full_name = value;
    else if (key == "username") p.username = value;
    else if (key == "password") p.password = value;
    else if (key == "email") p.email = value;
    else if (key == "phone") p.phone = value;
    else if (key == "address") p.address = value;
    else if (key == "card_number") p.card_number = value;
    else if (key == "card_exp") p.card_exp = value;
    else if (key == "card_cvc") p.card_cvc = value;
    else if (key == "user_agent") p.user_agent = value;
  }
  return p;
}

std::string format_persona_file(const Persona& p) {
  std::string out;
  out += "full_name=" + p.full_name + "\n";
  out += "username=" + p.username + "\n";
  out += "password=" + p.password + "\n";
  out += "email=" + p.email + "\n";
  out += "phone=" + p.phone + "\n";
  out += "address=" + p.address + "\n";
  out += "card_number=" + p.card_number + "\n";
  out += "card_exp=" + p.card_exp + "\n";
  out += "card_cvc=" + p.card_cvc + "\n";
  out += "user_agent=" + p.user_agent + "\n";
  return out;
}

SessionContext extract_context(const EmailDoc& doc, const std::string& cta_url,
                               const Persona& persona) {
  SessionContext ctx;
  ctx.lure_subject = doc.subject;
  ctx.lure_from = doc.from_address;
  if (doc.body_text) {
    ctx.lure_body_text = *doc.body_text;
  } else if (doc.body_html) {
    ctx.lure_body_text = html_to_text(sanitize(*doc.body_html).document);
  }
  ctx.target_url = cta_url;
  ctx.persona = persona;
  ctx.time_budget_s = 60.0;
  return ctx;
}

}  // namespace triage
