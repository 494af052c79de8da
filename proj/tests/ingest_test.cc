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

#include <sstream>

#include "doctest.h"
#include "test_util.h"
#include "wsner/errors.h"
#include "wsner/gazetteer.h"
#include "wsner/text.h"

namespace wsner {
namespace {

using std::chrono::milliseconds;

// Time only moves when the code under test sleeps.
class FakeClock : public Clock {
 public:
  std::chrono::steady_clock::time_point Now() override { return now_; }
  void SleepFor(std::chrono::steady_clock::duration duration) override {
    sleeps.push_back(std::chrono::duration_cast<milliseconds>(duration));
    now_ += duration;
  }

  std::vector<milliseconds> sleeps;

 private:
  std::chrono::steady_clock::time_point now_{};
};

std::string Data(const std::string &name) {
  return std::string(WSNER_TEST_DATA_DIR) + "/" + name;
}

std::string Page(const std::vector<std::string> &labels) {
  std::string body = R"({"head":{"vars":["label"]},"results":{"bindings":[)";
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) body += ",";
    body += R"({"label":{"type":"literal","value":")" + labels[i] + R"("}})";
  }
  return body + "]}}";
}

HttpResponse Ok(const std::string &body) { return {200, body, ""}; }

EntityQuery Query(EntityClass entity_class, int page_size = 1000) {
  EntityQuery query;
  query.entity_class = entity_class;
  query.page_size = page_size;
  return query;
}

TEST_SUITE_BEGIN("ingest");

TEST_CASE("entity class names") {
  CHECK(ParseEntityClass("person") == EntityClass::kPerson);
  CHECK(ParseEntityClass("organization") == EntityClass::kOrganization);
  CHECK(ParseEntityClass("location") == EntityClass::kLocation);
  CHECK_THROWS_AS(ParseEntityClass("PER"), Error);
  CHECK(EntityTypeFor(EntityClass::kOrganization) == "ORG");
  CHECK(EntityClassName(EntityClass::kLocation) == "location");
}

TEST_CASE("query validation") {
  EntityQuery query;
  CHECK_NOTHROW(query.Validate());
  query.page_size = 0;
  CHECK_THROWS_AS(query.Validate(), Error);
  query.page_size = 10001;
  CHECK_THROWS_AS(query.Validate(), Error);
  query.page_size = 10000;
  query.endpoint_url = "http://query.wikidata.org/sparql";
  CHECK_THROWS_AS(query.Validate(), Error);
  query.endpoint_url = std::string(kDefaultSparqlEndpoint);
  query.max_results = 0;
  CHECK_THROWS_AS(query.Validate(), Error);
  query.max_results.reset();
  query.language_code = "yo\")";
  CHECK_THROWS_AS(query.Validate(), Error);
  query.language_code = "";
  CHECK_THROWS_AS(query.Validate(), Error);
}

TEST_CASE("query text") {
  EntityQuery query = Query(EntityClass::kLocation);
  query.language_code = "en";
  std::string text = BuildSparqlQuery(query, 2000, 1000);
  CHECK(text.find("wdt:P31/wdt:P279* wd:Q2221906") != std::string::npos);
  CHECK(text.find("FILTER(LANG(?label) = \"en\")") != std::string::npos);
  CHECK(text.find("ORDER BY ?label") != std::string::npos);
  CHECK(text.find("LIMIT 1000 OFFSET 2000") != std::string::npos);
  CHECK(BuildSparqlQuery(Query(EntityClass::kPerson), 0, 5).find("wdt:P31 wd:Q5 .") !=
        std::string::npos);
  CHECK(BuildSparqlQuery(Query(EntityClass::kOrganization), 0, 5).find("wd:Q43229") !=
        std::string::npos);
}

TEST_CASE("decode SPARQL results") {
  CHECK(DecodeSparqlLabels(Page({})).empty());
  CHECK(DecodeSparqlLabels(Page({"Kano", "Èkó"})) == std::vector<std::string>{"Kano", "Èkó"});
  CHECK_THROWS_AS(DecodeSparqlLabels("<html>rate limited</html>"), DecodeError);
  CHECK_THROWS_AS(DecodeSparqlLabels(R"({"head":{}})"), DecodeError);
  CHECK_THROWS_AS(DecodeSparqlLabels(R"({"results":{"bindings":[{"item":{}}]}})"),
                  DecodeError);
  std::string long_body(500, 'x');
  try {
    DecodeSparqlLabels(long_body);
    FAIL("expected a decode error");
  } catch (const DecodeError &e) {
    CHECK(e.snippet().size() < 200);
    CHECK(e.snippet().rfind("xxx", 0) == 0);
  }
}

TEST_CASE("zero rows") {
  FixtureTransport transport({Ok(Page({}))});
  FakeClock clock;
  FetchResult result = FetchEntities(Query(EntityClass::kPerson), transport, {.clock = &clock});
  CHECK(result.entries.empty());
  CHECK_FALSE(result.truncated);
  CHECK(result.requests == 1);
}

TEST_CASE("locations are typed and sorted") {
  FixtureTransport transport = FixtureTransport::Load(Data("sparql_location_small.json"));
  FakeClock clock;
  FetchResult result = FetchEntities(Query(EntityClass::kLocation), transport, {.clock = &clock});
  REQUIRE(result.entries.size() == 2);
  CHECK(result.entries[0].surface == std::vector<std::string>{"Kano"});
  CHECK(result.entries[1].surface == std::vector<std::string>{"Lagos"});
  for (const auto &entry : result.entries) {
    CHECK(entry.type == "LOC");
    CHECK(entry.source == "wikidata");
  }
  REQUIRE(transport.requests().size() == 1);
  const HttpRequest &request = transport.requests()[0];
  CHECK(request.url == kDefaultSparqlEndpoint);
  CHECK(request.params.size() == 2);
  CHECK(request.params[1] == std::make_pair(std::string("format"), std::string("json")));
  bool accept = false;
  for (const auto &[name, value] : request.headers) {
    accept |= name == "Accept" && value == "application/sparql-results+json";
  }
  CHECK(accept);
}

TEST_CASE("pagination, dedup and truncation on the person fixture") {
  FixtureTransport transport = FixtureTransport::Load(Data("sparql_person_yo.json"));
  FakeClock clock;
  EntityQuery query = Query(EntityClass::kPerson, 60);
  query.max_results = 100;
  FetchResult result = FetchEntities(query, transport, {.clock = &clock});
  CHECK(result.entries.size() == 100);
  CHECK(result.truncated);
  CHECK(result.requests == 4);
  CHECK(transport.remaining() == 0);
  for (size_t i = 0; i < result.entries.size(); ++i) {
    const auto &entry = result.entries[i];
    CHECK(entry.type == "PER");
    CHECK_FALSE(entry.surface.empty());
    for (const auto &token : entry.surface) CHECK_FALSE(token.empty());
    if (i > 0) CHECK(Join(result.entries[i - 1].surface, " ") < Join(entry.surface, " "));
  }
  // Offsets advance by the page size; retries repeat the same page.
  REQUIRE(transport.requests().size() == 4);
  auto query_text = [&](int i) { return transport.requests()[i].params[0].second; };
  CHECK(query_text(0).find("OFFSET 0\n") != std::string::npos);
  CHECK(query_text(1) == query_text(0));
  CHECK(query_text(2).find("LIMIT 60 OFFSET 60\n") != std::string::npos);
  CHECK(query_text(3) == query_text(2));

  // Unlimited: every distinct label.
  FixtureTransport again = FixtureTransport::Load(Data("sparql_person_yo.json"));
  query.max_results.reset();
  FetchResult all = FetchEntities(query, again, {.clock = &clock});
  CHECK(all.entries.size() == 115);
  CHECK_FALSE(all.truncated);
}

TEST_CASE("rate limit and backoff") {
  FixtureTransport transport({{429, "", ""}, {0, "", "connection refused"}, Ok(Page({"A"}))});
  FakeClock clock;
  FetchOptions options;
  options.clock = &clock;
  options.min_interval = milliseconds(1000);
  options.backoff_base = milliseconds(1000);
  FetchResult result = FetchEntities(Query(EntityClass::kPerson), transport, options);
  CHECK(result.entries.size() == 1);
  CHECK(result.requests == 3);
  // Backoff 1 s, then 2 s; both already cover the 1 s interval.
  CHECK(clock.sleeps == std::vector<milliseconds>{milliseconds(1000), milliseconds(2000)});

  // Consecutive pages wait for the interval.
  FixtureTransport pages({Ok(Page({"A"})), Ok(Page({}))});
  FakeClock page_clock;
  options.clock = &page_clock;
  FetchEntities(Query(EntityClass::kPerson, 1), pages, options);
  CHECK(page_clock.sleeps == std::vector<milliseconds>{milliseconds(1000)});
}

TEST_CASE("transport errors") {
  FakeClock clock;
  FetchOptions options;
  options.clock = &clock;
  options.max_retries = 5;
  std::vector<HttpResponse> failures(6, HttpResponse{503, "busy", ""});
  FixtureTransport busy(failures);
  try {
    FetchEntities(Query(EntityClass::kPerson), busy, options);
    FAIL("expected a transport error");
  } catch (const TransportError &e) {
    CHECK(e.attempts() == 6);
    CHECK(std::string(e.what()).find("503") != std::string::npos);
  }
  CHECK(clock.sleeps.size() == 5);
  CHECK(clock.sleeps.back() == milliseconds(16000));

  // Client errors are not retried.
  FixtureTransport bad({{400, "bad query", ""}});
  try {
    FetchEntities(Query(EntityClass::kPerson), bad, options);
    FAIL("expected a transport error");
  } catch (const TransportError &e) {
    CHECK(e.attempts() == 1);
  }

  FixtureTransport garbage({Ok("<html>")});
  CHECK_THROWS_AS(FetchEntities(Query(EntityClass::kPerson), garbage, options), DecodeError);

  EntityQuery invalid = Query(EntityClass::kPerson);
  invalid.endpoint_url = "ftp://example.org";
  FixtureTransport unused({});
  CHECK_THROWS_AS(FetchEntities(invalid, unused, options), Error);
}

TEST_CASE("fixture format") {
  FixtureTransport fixture = FixtureTransport::Parse(
      R"({"responses":[{"status":503,"body":"x"},{"json":{"results":{"bindings":[]}}}]})");
  HttpRequest request;
  CHECK(fixture.Get(request).status == 503);
  HttpResponse second = fixture.Get(request);
  CHECK(second.status == 200);
  CHECK(DecodeSparqlLabels(second.body).empty());
  CHECK_THROWS_AS(fixture.Get(request), Error);
  CHECK_THROWS_AS(FixtureTransport::Parse("[]"), DecodeError);
  CHECK_THROWS_AS(FixtureTransport::Parse("{"), DecodeError);
}

TEST_CASE("recording and replay give the same TSV") {
  testing::TempDir dir("ingest");
  FakeClock clock;
  EntityQuery query = Query(EntityClass::kPerson, 60);
  FixtureTransport source = FixtureTransport::Load(Data("sparql_person_yo.json"));
  RecordingTransport recorder(source);
  FetchResult first = FetchEntities(query, recorder, {.clock = &clock});
  recorder.Save(dir.File("recorded.json"));
  WriteEntityTsv(first.entries, dir.File("first.tsv"));

  FixtureTransport replay = FixtureTransport::Load(dir.File("recorded.json"));
  FetchResult second = FetchEntities(query, replay, {.clock = &clock});
  WriteEntityTsv(second.entries, dir.File("second.tsv"));
  CHECK(testing::ReadFile(dir.File("first.tsv")) == testing::ReadFile(dir.File("second.tsv")));

  // The output parses back to the same entries.
  auto parsed = ReadEntityTsv(dir.File("first.tsv"));
  REQUIRE(parsed.size() == first.entries.size());
  for (size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].surface == first.entries[i].surface);
    CHECK(parsed[i].type == first.entries[i].type);
    CHECK(parsed[i].source == first.entries[i].source);
  }
}

TEST_CASE("entity TSV writing") {
  testing::TempDir dir("tsv");
  WriteEntityTsv({}, dir.File("empty.tsv"));
  CHECK(testing::ReadFile(dir.File("empty.tsv")).empty());

  std::vector<GazetteerEntry> one = {{{"Ìpínlẹ̀", "Ọ̀yọ́"}, "LOC", "wikidata"}};
  WriteEntityTsv(one, dir.File("one.tsv"));
  CHECK(testing::ReadFile(dir.File("one.tsv")) == "Ìpínlẹ̀ Ọ̀yọ́\tLOC\twikidata\n");
  // Overwrites.
  WriteEntityTsv(one, dir.File("one.tsv"));
  CHECK(testing::ReadFile(dir.File("one.tsv")) == "Ìpínlẹ̀ Ọ̀yọ́\tLOC\twikidata\n");

  std::ostringstream out;
  CHECK_THROWS_AS(WriteEntityTsv({{{}, "PER", "x"}}, out), SchemaError);
  CHECK_THROWS_AS(WriteEntityTsv({{{"a\tb"}, "PER", "x"}}, out), SchemaError);
  CHECK_THROWS_AS(WriteEntityTsv(one, dir.File("missing/dir.tsv")), Error);
}

TEST_SUITE_END();

}  // namespace
}  // namespace wsner
