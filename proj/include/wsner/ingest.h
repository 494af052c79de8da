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

#ifndef WSNER_INGEST_H_
#define WSNER_INGEST_H_

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wsner/gazetteer.h"

namespace wsner {

enum class EntityClass { kPerson, kOrganization, kLocation };

EntityClass ParseEntityClass(std::string_view name);
std::string_view EntityClassName(EntityClass entity_class);
// PER, ORG or LOC.
std::string_view EntityTypeFor(EntityClass entity_class);

inline constexpr std::string_view kDefaultSparqlEndpoint =
    "https://query.wikidata.org/sparql";
// Overrides the endpoint for the command line tool.
inline constexpr std::string_view kEndpointEnvironmentVariable =
    "WSNER_SPARQL_ENDPOINT";

struct EntityQuery {
  EntityClass entity_class = EntityClass::kPerson;
  std::string language_code = "yo";
  std::string endpoint_url = std::string(kDefaultSparqlEndpoint);
  int page_size = 1000;
  std::optional<std::int64_t> max_results;  // unlimited when empty

  // page_size in [1, 10000], https endpoint, positive max_results, plain
  // language code. Throws Error.
  void Validate() const;
};

// SPARQL text for one page of labels, ordered by label.
std::string BuildSparqlQuery(const EntityQuery &query, std::int64_t offset,
                             int limit);

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
  int status = 0;       // 0 when the request never got a response
  std::string body;
  std::string error;    // transport failure description
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse Get(const HttpRequest &request) = 0;
};

// Live HTTP(S) client.
class LiveTransport : public HttpTransport {
 public:
  explicit LiveTransport(int timeout_seconds = 60)
      : timeout_seconds_(timeout_seconds) {}
  HttpResponse Get(const HttpRequest &request) override;

 private:
  int timeout_seconds_;
};

// Replays recorded responses in order. Fixture layout:
//   {"responses": [{"status": 200, "body": "<text>"}, ...]}
// A response may give "json" (any JSON value) instead of "body".
class FixtureTransport : public HttpTransport {
 public:
  static FixtureTransport Load(const std::string &path);
  static FixtureTransport Parse(const std::string &text);
  explicit FixtureTransport(std::vector<HttpResponse> responses)
      : responses_(std::move(responses)) {}

  // Throws Error when the fixture is exhausted.
  HttpResponse Get(const HttpRequest &request) override;

  const std::vector<HttpRequest> &requests() const { return requests_; }
  size_t remaining() const { return responses_.size() - next_; }

 private:
  std::vector<HttpResponse> responses_;
  std::vector<HttpRequest> requests_;
  size_t next_ = 0;
};

// Forwards to another transport and keeps every response for Save.
class RecordingTransport : public HttpTransport {
 public:
  explicit RecordingTransport(HttpTransport &inner) : inner_(inner) {}
  HttpResponse Get(const HttpRequest &request) override;
  void Save(const std::string &path) const;

 private:
  HttpTransport &inner_;
  std::vector<HttpResponse> recorded_;
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::chrono::steady_clock::time_point Now() = 0;
  virtual void SleepFor(std::chrono::steady_clock::duration duration) = 0;
};

class SystemClock : public Clock {
 public:
  std::chrono::steady_clock::time_point Now() override;
  void SleepFor(std::chrono::steady_clock::duration duration) override;
};

struct FetchOptions {
  // At most one request per interval.
  std::chrono::milliseconds min_interval{1000};
  // Retries after 429, 5xx or a failed connection, with delays
  // backoff_base * 2^k.
  int max_retries = 5;
  std::chrono::milliseconds backoff_base{1000};
  Clock *clock = nullptr;  // SystemClock when null
};

struct FetchResult {
  std::vector<GazetteerEntry> entries;  // sorted by surface, deduplicated
  bool truncated = false;               // max_results cut the list
  int requests = 0;                     // HTTP attempts including retries
};

// Labels from a SPARQL JSON results document (head/results/bindings with
// label.value). Throws DecodeError with a snippet of the body.
std::vector<std::string> DecodeSparqlLabels(const std::string &body);

// Pages through the endpoint until a short page or max_results. Throws
// TransportError when a request keeps failing and DecodeError on bad bodies.
FetchResult FetchEntities(const EntityQuery &query, HttpTransport &transport,
                          const FetchOptions &options = {});

// Gazetteer TSV, one line per entry. Overwrites `path`.
void WriteEntityTsv(const std::vector<GazetteerEntry> &entries, std::ostream &out);
void WriteEntityTsv(const std::vector<GazetteerEntry> &entries,
                    const std::string &path);

}  // namespace wsner

#endif  // WSNER_INGEST_H_
