#include "buggin/remote.hpp"

#include <cctype>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "buggin/error.hpp"

namespace buggin {

namespace {

struct Endpoint {
  std::string scheme_host_port;
  std::string path_prefix;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint '" + url + "' has no scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  if (path_start == std::string::npos) {
    ep.scheme_host_port = url;
  } else {
    ep.scheme_host_port = url.substr(0, path_start);
    ep.path_prefix = url.substr(path_start);
  }
  while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  return ep;
}

bool is_timeout(httplib::Error e) {
  return e == httplib::Error::ConnectionTimeout || e == httplib::Error::Read ||
         e == httplib::Error::Write;
}

std::string url_encode(const std::string& value) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : value) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

BugReport decode_report(const std::string& bug_id, const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError("bug " + bug_id + ": malformed payload: " + e.what());
  }
  if (!doc.is_object()) throw DecodeError("bug " + bug_id + ": payload is not a JSON object");
  BugReport rep;
  rep.bug_id = bug_id;
  for (const char* key : {"title", "description"}) {
    if (!doc.contains(key)) throw DecodeError("bug " + bug_id + ": payload lacks '" + key + "'");
    const auto& v = doc[key];
    if (v.is_null()) continue;  // trackers return null for an empty description
    if (!v.is_string()) throw DecodeError("bug " + bug_id + ": '" + key + "' is not a string");
    (std::string(key) == "title" ? rep.title : rep.description) = v.get<std::string>();
  }
  for (const char* key : {"project", "target_name"}) {
    if (doc.contains(key) && doc[key].is_string()) {
      rep.project = doc[key].get<std::string>();
      break;
    }
  }
  return rep;
}

}  // namespace

BugReport fetch_remote_report(const std::string& endpoint, const std::string& bug_id,
                              std::chrono::milliseconds timeout, const RetryPolicy& retry) {
  if (bug_id.empty()) throw ValidationError("bug_id must be nonempty");
  const auto ep = split_endpoint(endpoint);
  httplib::Client client(ep.scheme_host_port);
  const auto secs = timeout.count() / 1000;
  const auto usecs = (timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  client.set_follow_location(true);

  const std::string path = ep.path_prefix + "/bugs/" + url_encode(bug_id);
  auto backoff = retry.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= retry.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Get(path, {{"Accept", "application/json"}});
    if (!res) {
      const auto err = res.error();
      last_error = httplib::to_string(err);
      if (is_timeout(err) || err == httplib::Error::Connection) continue;
      throw TransportError("bug " + bug_id + ": " + last_error);
    }
    if (res->status == 404) throw NotFoundError("bug " + bug_id + " not found at " + endpoint);
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError("bug " + bug_id + ": unexpected HTTP " + std::to_string(res->status));
    }
    return decode_report(bug_id, res->body);
  }
  throw TransportError("bug " + bug_id + ": giving up after " + std::to_string(retry.max_retries) +
                       " retries: " + last_error);
}

Corpus fetch_corpus_text(const std::string& endpoint, const std::vector<BugReport>& labeled,
                         std::chrono::milliseconds timeout, const RetryPolicy& retry,
                         const std::function<void(std::size_t, std::size_t)>& progress) {
  std::vector<BugReport> out;
  out.reserve(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    auto fetched = fetch_remote_report(endpoint, labeled[i].bug_id, timeout, retry);
    BugReport rep = labeled[i];
    rep.title = std::move(fetched.title);
    rep.description = std::move(fetched.description);
    if (rep.project.empty()) rep.project = std::move(fetched.project);
    out.push_back(std::move(rep));
    if (progress) progress(i + 1, labeled.size());
  }
  return Corpus(std::move(out));
}

}  // namespace buggin
