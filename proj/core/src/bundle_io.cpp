#include "triage/bundle_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>

#include "triage/errors.hpp"
#include "triage/ingest.hpp"

namespace triage {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error("read failed: " + p.string());
  return data;
}

void write_file(const fs::path& p, std::string_view content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for write " + p.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed: " + p.string());
}

namespace {

double parse_abs(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string())
    throw ParseError(std::string("bundle file: missing field ") + key);
  return std::strtod(j[key].get<std::string>().c_str(), nullptr);
}

std::string fixed3(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

json headers_to_json(const std::vector<Header>& hs) {
  json arr = json::array();
  for (const auto& h : hs)
    arr.push_back(json{{"name", canon_encode(h.name)}, {"value", canon_encode(h.value)}});
  return arr;
}

std::vector<Header> headers_from_json(const json& arr) {
  std::vector<Header> out;
  for (const auto& h : arr)
    out.push_back(Header{canon_decode(h.at("name").get<std::string>()),
                         canon_decode(h.at("value").get<std::string>())});
  return out;
}

}  // namespace

void save_bundle(const EvidenceBundle& b, const fs::path& dir) {
  if (!b.sealed()) throw IntegrityError("save_bundle: bundle not sealed");
  fs::create_directories(dir / "resources");

  write_file(dir / "manifest", json{{"bundle_id", canon_encode(b.bundle_id)},
                                    {"epoch_t0", format_abs6(b.epoch_t0)},
                                    {"session_end", b.session_end.str_fixed6()}}
                                   .dump());

  json net = json::array();
  for (const auto& r : b.network) {
    net.push_back(json{{"seq", r.seq},
                       {"started_at", format_abs6(r.started_at)},
                       {"duration_ms", fixed3(r.duration_ms)},
                       {"method", canon_encode(r.method)},
                       {"url", canon_encode(r.url)},
                       {"host", canon_encode(r.host)},
                       {"status", r.status},
                       {"request_headers", headers_to_json(r.request_headers)},
                       {"response_headers", headers_to_json(r.response_headers)},
                       {"request_body", canon_encode(r.request_body)},
                       {"request_body_truncated", r.request_body_truncated},
                       {"response_body_ref", canon_encode(r.response_body_ref)},
                       {"mime_type", canon_encode(r.mime_type)}});
  }
  write_file(dir / "network", net.dump());

  write_file(dir / "frames", format_frames(b.frames));
  write_file(dir / "actions", format_actions(b.actions));

  const Persona& p = b.context.persona;
  write_file(dir / "context",
             json{{"lure_subject", canon_encode(b.context.lure_subject)},
                  {"lure_body_text", canon_encode(b.context.lure_body_text)},
                  {"lure_from", canon_encode(b.context.lure_from)},
                  {"target_url", canon_encode(b.context.target_url)},
                  {"time_budget_s", fixed3(b.context.time_budget_s)},
                  {"persona",
                   json{{"full_name", canon_encode(p.full_name)},
                        {"username", canon_encode(p.username)},
                        {"password", canon_encode(p.password)},
                        {"email", canon_encode(p.email)},
                        {"phone", canon_encode(p.phone)},
                        {"address", canon_encode(p.address)},
                        {"card_number", canon_encode(p.card_number)},
                        {"card_exp", canon_encode(p.card_exp)},
                        {"card_cvc", canon_encode(p.card_cvc)},
                        {"user_agent", canon_encode(p.user_agent)}}}}
                 .dump());

  json index = json::object();
  for (const auto& [id, res] : b.resources.entries()) {
    index[id] = json{{"kind", std::string(resource_kind_name(res.kind))},
                     {"sha256", to_hex(res.sha256)}};
    write_file(dir / "resources" / ("b_" + id),
               std::string_view(reinterpret_cast<const char*>(res.content.data()),
                                res.content.size()));
  }
  write_file(dir / "resources" / "index", index.dump());

  write_file(dir / "seal", "sha256:" + to_hex(*b.manifest_hash) + "\n");
}

EvidenceBundle load_bundle(const fs::path& dir, bool check_seal) {
  EvidenceBundle b;
  json manifest, net, ctx, index;
  try {
    manifest = json::parse(read_file(dir / "manifest"));
    net = json::parse(read_file(dir / "network"));
    ctx = json::parse(read_file(dir / "context"));
    index = json::parse(read_file(dir / "resources" / "index"));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("bundle file: ") + e.what(), e.byte);
  }

  b.bundle_id = canon_decode(manifest.at("bundle_id").get<std::string>());
  b.epoch_t0 = parse_abs(manifest, "epoch_t0");
  auto send = parse_reltime(manifest.at("session_end").get<std::string>());
  if (!send) throw ParseError("bundle manifest: bad session_end");
  b.session_end = *send;

  try {
    for (const auto& r : net) {
      NetworkRecord rec;
      rec.seq = r.at("seq").get<std::uint64_t>();
      rec.started_at = std::strtod(r.at("started_at").get<std::string>().c_str(), nullptr);
      rec.duration_ms = std::strtod(r.at("duration_ms").get<std::string>().c_str(), nullptr);
      rec.method = canon_decode(r.at("method").get<std::string>());
      rec.url = canon_decode(r.at("url").get<std::string>());
      rec.host = canon_decode(r.at("host").get<std::string>());
      rec.status = r.at("status").get<int>();
      rec.request_headers = headers_from_json(r.at("request_headers"));
      rec.response_headers = headers_from_json(r.at("response_headers"));
      rec.request_body = canon_decode(r.at("request_body").get<std::string>());
      rec.request_body_truncated = r.at("request_body_truncated").get<bool>();
      rec.response_body_ref = canon_decode(r.at("response_body_ref").get<std::string>());
      rec.mime_type = canon_decode(r.at("mime_type").get<std::string>());
      b.network.push_back(std::move(rec));
    }

    for (auto it = index.begin(); it != index.end(); ++it) {
      auto kind = resource_kind_from_name(it.value().at("kind").get<std::string>());
      if (!kind) throw ParseError("bundle resources: unknown kind for " + it.key());
      std::string blob = read_file(dir / "resources" / ("b_" + it.key()));
      b.resources.put(it.key(), *kind,
                      std::vector<unsigned char>(blob.begin(), blob.end()));
    }

    const json& pj = ctx.at("persona");
    Persona p;
    p.full_name = canon_decode(pj.at("full_name").get<std::string>());
    p.username = canon_decode(pj.at("username").get<std::string>());
    p.password = canon_decode(pj.at("password").get<std::string>());
    p.email = canon_decode(pj.at("email").get<std::string>());
    p.phone = canon_decode(pj.at("phone").get<std::string>());
    p.address = canon_decode(pj.at("address").get<std::string>());
    p.card_number = canon_decode(pj.at("card_number").get<std::string>());
    p.card_exp = canon_decode(pj.at("card_exp").get<std::string>());
    p.card_cvc = canon_decode(pj.at("card_cvc").get<std::string>());
    p.user_agent = canon_decode(pj.at("user_agent").get<std::string>());
    b.context.persona = std::move(p);
    b.context.lure_subject = canon_decode(ctx.at("lure_subject").get<std::string>());
    b.context.lure_body_text = canon_decode(ctx.at("lure_body_text").get<std::string>());
    b.context.lure_from = canon_decode(ctx.at("lure_from").get<std::string>());
    b.context.target_url = canon_decode(ctx.at("target_url").get<std::string>());
    b.context.time_budget_s = std::strtod(ctx.at("time_budget_s").get<std::string>().c_str(), nullptr);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bundle file: ") + e.what());
  }

  b.frames = ingest_frames(read_file(dir / "frames"), b.resources);
  b.actions = ingest_actions(read_file(dir / "actions"));

  std::string seal_line(trim(read_file(dir / "seal")));
  if (seal_line.rfind("sha256:", 0) != 0)
    throw ParseError("bundle seal: unsupported digest line");
  auto digest = digest_from_hex(seal_line.substr(7));
  if (!digest) throw ParseError("bundle seal: bad digest hex");

  if (check_seal && !verify(b, *digest))
    throw IntegrityError("bundle digest mismatch for " + dir.string());
  b.manifest_hash = *digest;
  return b;
}

}  // namespace triage
