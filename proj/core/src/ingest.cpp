#include "triage/ingest.hpp"

#include <algorithm>
#include <charconv>

#include "triage/errors.hpp"

namespace triage {

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      std::string_view line = text.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      start = i + 1;
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::vector<FrameRecord> ingest_frames(std::string_view manifest,
                                       const ResourceStore& resources) {
  std::vector<FrameRecord> out;
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(manifest)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3)
      throw ParseError("frame manifest: expected 3 tab-separated fields", ParseError::kNoOffset,
                       line_no);
    auto frame_no = parse_u64(trim(cols[0]));
    auto t_rel = parse_reltime(cols[1]);
    std::string image_ref(trim(cols[2]));
    if (!frame_no || !t_rel)
      throw ParseError("frame manifest: bad frame_no or t_rel", ParseError::kNoOffset, line_no);
    if (!out.empty()) {
      if (*t_rel <= out.back().t_rel || *frame_no <= out.back().frame_no)
        throw MonotonicityError("frame manifest: non-monotonic at frame " +
                                    std::to_string(*frame_no),
                                *frame_no);
    }
    if (!resources.contains(image_ref))
      throw MissingResourceError("frame manifest: dangling image_ref '" + image_ref + "'");
    out.push_back(FrameRecord{*frame_no, *t_rel, std::move(image_ref)});
  }
  return out;
}

namespace {

ActionEvent parse_action_line(std::string_view line, std::size_t line_no) {
  auto cols = split(line, '\t');
  if (cols.size() != 4)
    throw ParseError("action log: expected 4 tab-separated fields", ParseError::kNoOffset,
                     line_no);
  auto t_rel = parse_reltime(cols[0]);
  if (!t_rel) throw ParseError("action log: bad t_rel", ParseError::kNoOffset, line_no);

  ActionEvent ev;
  ev.t_rel = *t_rel;
  ev.annotation = field_unescape(trim(cols[3]));
  std::string_view kind = trim(cols[1]);
  std::string_view payload = cols[2];

  if (kind == "click") {
    auto parts = split(payload, ',');
    if (parts.size() != 2)
      throw ParseError("action log: click payload must be 'x,y'", ParseError::kNoOffset,
                       line_no);
    auto x = parse_int(trim(parts[0])), y = parse_int(trim(parts[1]));
    if (!x || !y)
      throw ParseError("action log: click coordinates not integers", ParseError::kNoOffset,
                       line_no);
    ev.kind = ActionKind::click;
    ev.payload = ClickPayload{*x, *y};
  } else if (kind == "type") {
    // target=<escaped>;text=<escaped>
    TypePayload tp;
    bool saw_target = false, saw_text = false;
    for (auto part : split(payload, ';')) {
      auto eq = part.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = part.substr(0, eq);
      auto val = part.substr(eq + 1);
      if (key == "target") {
        tp.target = field_unescape(val);
        saw_target = true;
      } else if (key == "text") {
        tp.text = field_unescape(val);
        saw_text = true;
      }
    }
    if (!saw_target || !saw_text || tp.text.empty())
      throw ParseError("action log: type payload needs non-empty target/text",
                       ParseError::kNoOffset, line_no);
    ev.kind = ActionKind::type;
    ev.payload = std::move(tp);
  } else if (kind == "scroll") {
    auto dy = parse_int(trim(payload));
    if (!dy) throw ParseError("action log: scroll payload not an integer",
                              ParseError::kNoOffset, line_no);
    ev.kind = ActionKind::scroll;
    ev.payload = ScrollPayload{*dy};
  } else if (kind == "key") {
    ev.kind = ActionKind::key;
    ev.payload = KeyPayload{field_unescape(trim(payload))};
  } else if (kind == "navigate") {
    ev.kind = ActionKind::navigate;
    ev.payload = NavigatePayload{field_unescape(trim(payload))};
  } else if (kind == "note") {
    ev.kind = ActionKind::note;
    ev.payload = NotePayload{field_unescape(payload)};
  } else {
    // Unknown kinds are preserved as audit notes carrying the raw line.
    ev.kind = ActionKind::note;
    ev.payload = NotePayload{std::string(line)};
  }
  return ev;
}

}  // namespace

std::vector<ActionEvent> ingest_actions(std::string_view log) {
  std::vector<ActionEvent> out;
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(log)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    out.push_back(parse_action_line(line, line_no));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ActionEvent& a, const ActionEvent& b) { return a.t_rel < b.t_rel; });
  return out;
}

std::string format_frames(const std::vector<FrameRecord>& frames) {
  std::string out;
  for (const auto& f : frames) {
    out += std::to_string(f.frame_no);
    out += '\t';
    out += f.t_rel.str();
    out += '\t';
    out += f.image_ref;
    out += '\n';
  }
  return out;
}

std::string format_actions(const std::vector<ActionEvent>& actions) {
  std::string out;
  for (const auto& a : actions) {
    out += a.t_rel.str();
    out += '\t';
    out += action_kind_name(a.kind);
    out += '\t';
    switch (a.kind) {
      case ActionKind::click: {
        const auto& p = std::get<ClickPayload>(a.payload);
        out += std::to_string(p.x) + "," + std::to_string(p.y);
        break;
      }
      case ActionKind::type: {
        const auto& p = std::get<TypePayload>(a.payload);
        out += "target=" + field_escape(p.target) + ";text=" + field_escape(p.text);
        break;
      }
      case ActionKind::scroll:
        out += std::to_string(std::get<ScrollPayload>(a.payload).dy);
        break;
      case ActionKind::key:
        out += field_escape(std::get<KeyPayload>(a.payload).key);
        break;
      case ActionKind::navigate:
        out += field_escape(std::get<NavigatePayload>(a.payload).url);
        break;
      case ActionKind::note:
        out += field_escape(std::get<NotePayload>(a.payload).text);
        break;
    }
    out += '\t';
    out += field_escape(a.annotation);
    out += '\n';
  }
  return out;
}

}  // namespace triage
