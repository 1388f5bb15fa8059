#include <doctest.h>

#include <algorithm>
#include <cctype>

#include "triage/errors.hpp"
#include "triage/html_tokens.hpp"
#include "triage/preprocessor.hpp"

using namespace triage;

namespace {

std::string simple_eml(const std::string& content_type, const std::string& body) {
  return "From: IT Support <support@streaming-service.com>\r\n"
         "To: victim@corp.example\r\n"
         "Subject: Action Required: Update your billing information\r\n"
         "MIME-Version: 1.0\r\n"
         "Content-Type: " + content_type + "\r\n"
         "\r\n" + body;
}

const char* kMultipart =
    "From: alerts@service.example\r\n"
    "Subject: =?UTF-8?B?QWNjb3VudCBub3RpY2U=?=\r\n"
    "MIME-Version: 1.0\r\n"
    "Content-Type: multipart/alternative; boundary=\"BOUND\"\r\n"
    "\r\n"
    "--BOUND\r\n"
    "Content-Type: text/plain\r\n"
    "\r\n"
    "Plain text version.\r\n"
    "--BOUND\r\n"
    "Content-Type: text/html\r\n"
    "Content-Transfer-Encoding: quoted-printable\r\n"
    "\r\n"
    "<html><body><p>Html=20version.</p></body></html>\r\n"
    "--BOUND--\r\n";

// Independent tag-strip oracle for the text-extraction comparison.
std::string strip_tags_oracle(const std::string& html) {
  std::string out;
  bool in_tag = false;
  for (char c : html) {
    if (c == '<') in_tag = true;
    else if (c == '>') in_tag = false;
    else if (!in_tag) out.push_back(c);
  }
  std::string collapsed;
  for (char c : out) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!collapsed.empty() && collapsed.back() != ' ') collapsed.push_back(' ');
    } else {
      collapsed.push_back(c);
    }
  }
  while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
  return collapsed;
}

}  // namespace

TEST_CASE("parse_eml: simple html message") {
  auto doc = parse_eml(simple_eml("text/html", "<html><body>Hello</body></html>"));
  CHECK(doc.subject == "Action Required: Update your billing information");
  CHECK(doc.from_address == "support@streaming-service.com");
  REQUIRE(doc.body_html.has_value());
  CHECK_FALSE(doc.body_text.has_value());
}

TEST_CASE("parse_eml: multipart/alternative prefers both bodies") {
  auto doc = parse_eml(kMultipart);
  CHECK(doc.subject == "Account notice");  // encoded-word decoded
  REQUIRE(doc.body_html.has_value());
  REQUIRE(doc.body_text.has_value());
  CHECK(doc.body_html->find("Html version.") != std::string::npos);  // QP decoded
  CHECK(doc.body_text->find("Plain text version.") != std::string::npos);
}

TEST_CASE("parse_eml: base64 transfer encoding") {
  // "PGI+aGk8L2I+" is the base64 form of "<b>hi</b>".
  auto doc = parse_eml(simple_eml("text/html\r\nContent-Transfer-Encoding: base64",
                                  "PGI+aGk8L2I+"));
  REQUIRE(doc.body_html.has_value());
  CHECK(*doc.body_html == "<b>hi</b>");
}

TEST_CASE("parse_eml error paths") {
  CHECK_THROWS_AS(parse_eml(""), ParseError);
  CHECK_THROWS_AS(parse_eml("From: x@y.example\r\nSubject: no body separator"), ParseError);
  // Truncated multipart: opening boundary never closed.
  std::string truncated =
      "From: a@b.example\r\nContent-Type: multipart/mixed; boundary=\"B\"\r\n\r\n--B\r\n"
      "Content-Type: text/plain\r\n\r\nhalf";
  CHECK_THROWS_AS(parse_eml(truncated), ParseError);
  // Parsable structure but no text or html body.
  std::string no_body = simple_eml("application/octet-stream", "BINARYBYTES");
  CHECK_THROWS_AS(parse_eml(no_body), EmptyBodyError);
}

TEST_CASE("sanitize removes scripts, handlers and javascript urls") {
  auto safe = sanitize(
      "<a href=x onclick=steal()>Go</a><script>evil()</script>"
      "<a href=\"javascript:alert(1)\">J</a>");
  CHECK(safe.document.find("onclick") == std::string::npos);
  CHECK(safe.document.find("<script") == std::string::npos);
  CHECK(safe.document.find("evil()") == std::string::npos);
  CHECK(safe.document.find("javascript:") == std::string::npos);
  CHECK(safe.document.find("<a href=\"x\">Go</a>") != std::string::npos);  // anchor kept
  CHECK(safe.removals.at("event_handler") == 1);
  CHECK(safe.removals.at("script") == 1);
  CHECK(safe.removals.at("js_url") == 1);
}

TEST_CASE("sanitize replaces remote loads with inert placeholders") {
  auto safe = sanitize(
      "<img src=\"https://t.example/p.gif\" alt=\"pixel\">"
      "<iframe src=\"https://bad.example/f\"></iframe>"
      "<div style=\"background: url('https://bad.example/bg.png')\">x</div>"
      "<link rel=\"stylesheet\" href=\"https://cdn.example/a.css\">");
  CHECK(safe.document.find("t.example") == std::string::npos);
  CHECK(safe.document.find("bad.example") == std::string::npos);
  CHECK(safe.document.find("cdn.example") == std::string::npos);
  CHECK(safe.document.find("data:,") != std::string::npos);
  CHECK(safe.document.find("alt=\"pixel\"") != std::string::npos);
  CHECK(safe.removals.at("remote_load") == 4);
}

TEST_CASE("sanitize strips form submission targets") {
  auto safe = sanitize("<form action=\"https://collect.example/p\" method=post>"
                       "<input name=u></form>");
  CHECK(safe.document.find("collect.example") == std::string::npos);
  CHECK(safe.document.find("<form") != std::string::npos);  // structure preserved
  CHECK(safe.removals.at("form_action") == 1);
}

TEST_CASE("sanitize is idempotent") {
  std::string nasty =
      "<div onmouseover=x()><a href=\"javascript:void(0)\">c</a>"
      "<script src=\"https://x.example/s.js\"></script>"
      "<img src=\"https://x.example/i.png\"><style>body{background:url(a.png)}</style></div>";
  auto once = sanitize(nasty);
  auto twice = sanitize(once.document);
  CHECK(twice.document == once.document);
  for (const auto& [kind, count] : twice.removals) CHECK(count == 0);
}

TEST_CASE("sanitize: no-egress parser sweep") {
  std::string page =
      "<html><head><meta http-equiv=\"refresh\" content=\"0;url=https://x.example\">"
      "</head><body onload=go()><a href=\"https://ok.example/reset\" class=\"btn\">Reset"
      "</a><img srcset=\"a.png 1x\" src=\"https://x.example/a.png\"></body></html>";
  auto safe = sanitize(page);
  HtmlTokenizer tok(safe.document);
  while (auto token = tok.next()) {
    if (!std::holds_alternative<HtmlTag>(*token)) continue;
    const HtmlTag& tag = std::get<HtmlTag>(*token);
    CHECK(tag.name != "script");
    for (const auto& [name, value] : tag.attrs) {
      CHECK_FALSE((name.size() > 2 && name.rfind("on", 0) == 0));
      CHECK(name != "srcset");
      if (name == "src" || name == "background")
        CHECK(value == "data:,");
      if (name == "href" && tag.name == "link") CHECK(value == "data:,");
      CHECK(value.find("javascript:") == std::string::npos);
    }
  }
}

TEST_CASE("sanitize rejects pathological nesting") {
  std::string deep;
  for (int i = 0; i < 600; ++i) deep += "<div>";
  CHECK_THROWS_AS(sanitize(deep), DepthError);
}

TEST_CASE("enumerate_links: document order, absolutization, hints") {
  std::string html =
      "<base href=\"https://mail.example/msg/1\">"
      "<a href=\"https://example.com/privacy\">Privacy Policy</a>"
      "<a href=\"/reset?token=123\" class=\"btn-primary\">Reset Password</a>"
      "<a href=\"help/contact\">Contact Support</a>"
      "<a href=\"#anchor\">Skip</a>"
      "<a>No href</a>";
  auto safe = sanitize(html);
  auto links = enumerate_links(safe);
  REQUIRE(links.size() == 3);
  CHECK(links[0].index == 1);
  CHECK(links[0].text == "Privacy Policy");
  CHECK(links[0].url == "https://example.com/privacy");
  CHECK(links[1].index == 2);
  CHECK(links[1].url == "https://mail.example/reset?token=123");  // root-relative
  CHECK(links[1].button_like);
  CHECK(links[2].url == "https://mail.example/msg/help/contact");  // path-relative
  CHECK_FALSE(links[0].button_like);

  // Candidate completeness: anchors with resolvable hrefs only.
  CHECK(enumerate_links(sanitize("<p>no links</p>")).empty());
}

TEST_CASE("build_cta_prompt emits the numbered template") {
  std::vector<LinkCandidate> candidates = {
      {1, "Privacy Policy", "https://example.com/privacy", false, 2},
      {2, "Reset Password", "https://example.com/reset?token=123", true, 1},
      {3, "Contact Support", "https://example.com/support", false, 3},
  };
  std::string prompt = build_cta_prompt(candidates);
  CHECK(prompt.find("Analyze the provided email image.") == 0);
  CHECK(prompt.find("1. TEXT: \"Privacy Policy\" - URL: \"https://example.com/privacy\"") !=
        std::string::npos);
  CHECK(prompt.find("2. TEXT: \"Reset Password\" - URL: "
                    "\"https://example.com/reset?token=123\"") != std::string::npos);
  CHECK(prompt.find("3. TEXT: \"Contact Support\" - URL: "
                    "\"https://example.com/support\"") != std::string::npos);
  CHECK(prompt.find("Only respond with the number.") != std::string::npos);

  // Quotes in candidate text stay on one line, escaped.
  std::vector<LinkCandidate> quoted = {{1, "Say \"hi\"\nnow", "https://x.example/", false, 1}};
  std::string p2 = build_cta_prompt(quoted);
  CHECK(p2.find("TEXT: \"Say \\\"hi\\\" now\"") != std::string::npos);

  CHECK_THROWS_AS(build_cta_prompt({}), NoCandidatesError);
}

TEST_CASE("select_cta heuristic: stoplist then button preference") {
  std::vector<LinkCandidate> candidates = {
      {1, "Privacy Policy", "https://example.com/privacy", false, 2},
      {2, "Reset Password", "https://example.com/reset", true, 1},
      {3, "Contact Support", "https://example.com/support", false, 3},
  };
  SafeHtml safe;
  CHECK(select_cta(safe, candidates) == 2);

  // Single candidate short-circuits.
  std::vector<LinkCandidate> one = {{1, "Go", "https://x.example/", false, 1}};
  CHECK(select_cta(safe, one) == 1);

  // All candidates stoplisted: restored, then preference applies.
  std::vector<LinkCandidate> footers = {
      {1, "Privacy", "https://x.example/p", false, 2},
      {2, "Unsubscribe", "https://x.example/u", true, 1},
  };
  CHECK(select_cta(safe, footers) == 2);

  // No button hints: lowest area_rank wins, then document order.
  std::vector<LinkCandidate> ranks = {
      {1, "Open the full statement now", "https://x.example/a", false, 1},
      {2, "View", "https://x.example/b", false, 2},
  };
  CHECK(select_cta(safe, ranks) == 1);
}

TEST_CASE("select_cta visual backend with fallback") {
  struct CannedSelector : VisualSelector {
    std::string reply;
    std::string choose(const SafeHtml&, const std::string& prompt) override {
      CHECK(prompt.find("Candidate Links:") != std::string::npos);
      return reply;
    }
  } selector;
  std::vector<LinkCandidate> candidates = {
      {1, "Privacy Policy", "https://example.com/privacy", false, 2},
      {2, "Reset Password", "https://example.com/reset", true, 1},
      {3, "Contact Support", "https://example.com/support", false, 3},
  };
  SafeHtml safe;

  selector.reply = "3";
  CHECK(select_cta(safe, candidates, &selector) == 3);
  selector.reply = "The answer is 1.";
  CHECK(select_cta(safe, candidates, &selector) == 1);
  selector.reply = "seven";  // non-numeric: heuristic fallback
  CHECK(select_cta(safe, candidates, &selector) == 2);
  selector.reply = "9";  // out of range: heuristic fallback
  CHECK(select_cta(safe, candidates, &selector) == 2);
}

TEST_CASE("extract_context populates the lure and persona") {
  auto doc = parse_eml(simple_eml(
      "text/html", "<html><body><p>Dear Customer, update now.</p>"
                   "<a href=\"https://evil.example/pay\" class=\"btn\">Update</a>"
                   "</body></html>"));
  Persona persona = Persona::default_persona();
  SessionContext ctx = extract_context(doc, "https://evil.example/pay", persona);
  CHECK(ctx.lure_subject == "Action Required: Update your billing information");
  CHECK(ctx.lure_from == "support@streaming-service.com");
  CHECK(ctx.target_url == "https://evil.example/pay");
  CHECK(ctx.time_budget_s == doctest::Approx(60.0));
  CHECK(ctx.persona.password == persona.password);
  // Html-only message: body text equals the tag-stripped rendering.
  CHECK(ctx.lure_body_text.find("Dear Customer, update now.") != std::string::npos);

  // Text-only passthrough.
  auto text_doc = parse_eml(simple_eml("text/plain", "Just words."));
  CHECK(extract_context(text_doc, "", persona).lure_body_text == "Just words.");
}

TEST_CASE("html_to_text agrees with an independent tag-strip oracle") {
  std::string html =
      "<html><body><p>Dear Customer,</p><p>update &amp; verify now.</p></body></html>";
  std::string mine = html_to_text(html);
  std::string flat;
  for (char c : mine) flat.push_back(c == '\n' ? ' ' : c);
  CHECK(flat == strip_tags_oracle(
                    "<html><body><p>Dear Customer,</p> <p>update & verify now.</p></body></html>"));
}

TEST_CASE("persona.v1 file round trip") {
  Persona p = Persona::default_persona();
  Persona parsed = parse_persona_file(format_persona_file(p));
  CHECK(parsed.full_name == p.full_name);
  CHECK(parsed.password == p.password);
  CHECK(parsed.card_number == p.card_number);
  CHECK(parsed.user_agent == p.user_agent);

  Persona partial = parse_persona_file("username=alice\npassword=secret123\n");
  CHECK(partial.username == "alice");
  CHECK(partial.password == "secret123");
  CHECK(partial.email == p.email);  // defaults fill the rest
  CHECK(partial.complete());
}

TEST_CASE("default persona mirrors the configured synthetic identity") {
  Persona p = Persona::default_persona();
  CHECK(p.full_name == "Bob Alice");
  CHECK(p.username == "randombob");
  CHECK(p.password == "ZK29YcCITMb!");
  CHECK(p.email == "boba@demo.com");
  CHECK(p.phone == "+1-555-0199");
  // Stored verbatim; the card number is intentionally not checksum-validated.
  CHECK(p.card_number == "1234 5678 9012 3456");
  CHECK(p.card_exp == "12/29");
  CHECK(p.card_cvc == "000");
  auto secrets = p.secrets();
  CHECK(std::find(secrets.begin(), secrets.end(), "1234567890123456") != secrets.end());
}
