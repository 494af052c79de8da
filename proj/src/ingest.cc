// Copyright 2026 The wsner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wsner/ingest.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "wsner/errors.h"
#include "wsner/text.h"

namespace wsner {

using json = nlohmann::json;

namespace {

std::string Snippet(std::string_view body) {
  constexpr size_t kMax = 120;
  std::string out(body.substr(0, kMax));
  if (body.size() > kMax) out += "...";
  return out;
}

bool Retriable(const HttpResponse &response) {
  return response.status == 0 || response.status == 429 || response.status >= 500;
}

// Whitespace (including tabs and newlines) collapsed to single spaces.
std::string CleanLabel(std::string_view label) {
  std::string out;
  bool space = false;
  for (char c : label) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (ws) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

}  // namespace

EntityClass ParseEntityClass(std::string_view name) {
  if (name == "person") return EntityClass::kPerson;
  if (name == "organization") return EntityClass::kOrganization;
  if (name == "location") return EntityClass::kLocation;
  throw Error("unknown entity class \"" + std::string(name) +
              "\" (expected person, organization or location)");
}

std::string_view EntityClassName(EntityClass entity_class) {
  switch (entity_class) {
    case EntityClass::kPerson: return "person";
    case EntityClass::kOrganization: return "organization";
    case EntityClass::kLocation: return "location";
  }
  return "";
}

std::string_view EntityTypeFor(EntityClass entity_class) {
  switch (entity_class) {
    case EntityClass::kPerson: return "PER";
    case EntityClass::kOrganization: return "ORG";
    case EntityClass::kLocation: return "LOC";
  }
  return "";
}

void EntityQuery::Validate() const {
  if (page_size < 1 || page_size > 10000) {
    throw Error("page_size must be between 1 and 10000");
  }
  if (endpoint_url.rfind("https://", 0) != 0) {
    throw Error("endpoint must use https: " + endpoint_url);
  }
  if (max_results && *max_results < 1) throw Error("max_results must be positive");
  if (language_code.empty()) throw Error("empty language code");
  for (char c : language_code) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '-';
    if (!ok) throw Error("invalid language code \"" + language_code + "\"");
  }
}

std::string BuildSparqlQuery(const EntityQuery &query, std::int64_t offset,
                             int limit) {
  std::string pattern;
  switch (query.entity_class) {
    case EntityClass::kPerson:
      pattern = "?item wdt:P31 wd:Q5 .";
      break;
    case EntityClass::kOrganization:
      pattern = "?item wdt:P31/wdt:P279* wd:Q43229 .";
      break;
    case EntityClass::kLocation:
      pattern = "?item wdt:P31/wdt:P279* wd:Q2221906 .";
      break;
  }
  std::ostringstream q;
  q << "SELECT DISTINCT ?label WHERE {\n"
    << "  " << pattern << "\n"
    << "  ?item rdfs:label ?label .\n"
    << "  FILTER(LANG(?label) = \"" << query.language_code << "\")\n"
    << "}\n"
    << "ORDER BY ?label\n"
    << "LIMIT " << limit << " OFFSET " << offset << "\n";
  return q.str();
}

// ---------------------------------------------------------------------------
// Transports

HttpResponse LiveTransport::Get(const HttpRequest &request) {
  const std::string &url = request.url;
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return {0, "", "malformed url " + url};
  size_t path_start = url.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_seconds_, 0);
  client.set_read_timeout(timeout_seconds_, 0);
  client.set_follow_location(true);
  httplib::Params params(request.params.begin(), request.params.end());
  httplib::Headers headers(request.headers.begin(), request.headers.end());
  auto result = client.Get(path, params, headers);
  if (!result) return {0, "", httplib::to_string(result.error())};
  return {result->status, result->body, ""};
}

FixtureTransport FixtureTransport::Parse(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception &e) {
    throw DecodeError("fixture is not valid JSON", Snippet(text));
  }
  if (!doc.is_object() || !doc.contains("responses") || !doc["responses"].is_array()) {
    throw DecodeError("fixture must hold a \"responses\" array", Snippet(text));
  }
  std::vector<HttpResponse> responses;
  for (const auto &item : doc["responses"]) {
    HttpResponse response;
    response.status = item.value("status", 200);
    if (item.contains("json")) {
      response.body = item["json"].dump();
    } else {
      response.body = item.value("body", std::string());
    }
    response.error = item.value("error", std::string());
    responses.push_back(std::move(response));
  }
  return FixtureTransport(std::move(responses));
}

FixtureTransport FixtureTransport::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

HttpResponse FixtureTransport::Get(const HttpRequest &request) {
  requests_.push_back(request);
  if (next_ >= responses_.size()) {
    throw Error("fixture exhausted after " + std::to_string(next_) + " responses");
  }
  return responses_[next_++];
}

HttpResponse RecordingTransport::Get(const HttpRequest &request) {
  HttpResponse response = inner_.Get(request);
  recorded_.push_back(response);
  return response;
}

void RecordingTransport::Save(const std::string &path) const {
  json doc;
  doc["responses"] = json::array();
  for (const auto &response : recorded_) {
    json item;
    item["status"] = response.status;
    item["body"] = response.body;
    if (!response.error.empty()) item["error"] = response.error;
    doc["responses"].push_back(std::move(item));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << doc.dump(1) << '\n';
}

std::chrono::steady_clock::time_point SystemClock::Now() {
  return std::chrono::steady_clock::now();
}

void SystemClock::SleepFor(std::chrono::steady_clock::duration duration) {
  std::this_thread::sleep_for(duration);
}

// ---------------------------------------------------------------------------
// Fetching

std::vector<std::string> DecodeSparqlLabels(const std::string &body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception &) {
    throw DecodeError("response is not valid JSON", Snippet(body));
  }
  const json *bindings = nullptr;
  if (doc.is_object() && doc.contains("results") && doc["results"].is_object() &&
      doc["results"].contains("bindings") && doc["results"]["bindings"].is_array()) {
    bindings = &doc["results"]["bindings"];
  }
  if (bindings == nullptr) {
    throw DecodeError("response lacks results.bindings", Snippet(body));
  }
  std::vector<std::string> labels;
  for (const auto &binding : *bindings) {
    if (!binding.is_object() || !binding.contains("label") ||
        !binding["label"].is_object() || !binding["label"].contains("value") ||
        !binding["label"]["value"].is_string()) {
      throw DecodeError("binding without label.value", Snippet(binding.dump()));
    }
    labels.push_back(binding["label"]["value"].get<std::string>());
  }
  return labels;
}

FetchResult FetchEntities(const EntityQuery &query, HttpTransport &transport,
                          const FetchOptions &options) {
  query.Validate();
  SystemClock system_clock;
  Clock &clock = options.clock != nullptr ? *options.clock : system_clock;

  FetchResult result;
  std::set<std::string> labels;
  std::optional<std::chrono::steady_clock::time_point> last_request;
  const std::int64_t wanted =
      query.max_results ? *query.max_results : std::numeric_limits<std::int64_t>::max();

  auto request_page = [&](std::int64_t offset) {
    HttpRequest request;
    request.url = query.endpoint_url;
    request.params = {{"query", BuildSparqlQuery(query, offset, query.page_size)},
                      {"format", "json"}};
    request.headers = {{"Accept", "application/sparql-results+json"},
                       {"User-Agent", "wsner/0.1 (entity list ingest)"}};
    for (int attempt = 0;; ++attempt) {
      if (last_request) {
        auto ready = *last_request + options.min_interval;
        auto now = clock.Now();
        if (now < ready) clock.SleepFor(ready - now);
      }
      last_request = clock.Now();
      ++result.requests;
      HttpResponse response = transport.Get(request);
      if (response.status == 200) return response.body;
      std::string what = response.status == 0
                             ? "request failed: " + response.error
                             : "HTTP status " + std::to_string(response.status);
      if (!Retriable(response) || attempt >= options.max_retries) {
        throw TransportError(what, attempt + 1);
      }
      clock.SleepFor(options.backoff_base * (1LL << attempt));
    }
  };

  for (std::int64_t offset = 0;; offset += query.page_size) {
    std::string body = request_page(offset);
    auto page = DecodeSparqlLabels(body);
    for (const auto &raw : page) {
      std::string label = CleanLabel(raw);
      if (!label.empty()) labels.insert(label);
    }
    if (static_cast<std::int64_t>(labels.size()) > wanted) break;
    if (static_cast<int>(page.size()) < query.page_size) break;
  }

  std::string type(EntityTypeFor(query.entity_class));
  for (const auto &label : labels) {
    if (static_cast<std::int64_t>(result.entries.size()) == wanted) {
      result.truncated = true;
      break;
    }
    result.entries.push_back({SplitSpaces(label), type, "wikidata"});
  }
  return result;
}

void WriteEntityTsv(const std::vector<GazetteerEntry> &entries, std::ostream &out) {
  for (const auto &entry : entries) {
    if (entry.surface.empty()) throw SchemaError("entry without surface");
    std::string surface = Join(entry.surface, " ");
    if (surface.find_first_of("\t\n\r") != std::string::npos ||
        entry.type.find_first_of("\t\n\r") != std::string::npos ||
        entry.source.find_first_of("\t\n\r") != std::string::npos) {
      throw SchemaError("entry fields cannot contain tabs or newlines");
    }
    out << surface << '\t' << entry.type << '\t' << entry.source << '\n';
  }
}

void WriteEntityTsv(const std::vector<GazetteerEntry> &entries,
                    const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  WriteEntityTsv(entries, out);
  if (!out) throw Error("write failed: " + path);
}

}  // namespace wsner
