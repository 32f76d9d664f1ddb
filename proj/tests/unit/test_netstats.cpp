#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "viewshift/errors.hpp"
#include "viewshift/netstats.hpp"
#include "viewshift/random.hpp"
#include "viewshift/series.hpp"
#include "viewshift/synth.hpp"

using namespace viewshift;

namespace {

GameObservation obs(std::string name, std::int64_t streamers, std::int64_t viewers) {
  return GameObservation{std::move(name), streamers, viewers, std::nullopt};
}

// Inverse-CDF draw from a continuous power law with density ~ x^-alpha.
std::vector<double> power_law_samples(std::size_t n, double alpha, double xmin, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = xmin * std::pow(1.0 - uniform_unit(rng), -1.0 / (alpha - 1.0));
  return out;
}

}  // namespace

TEST_CASE("population histograms count exact values") {
  const Snapshot s{100, {obs("A", 1, 10), obs("B", 2, 10), obs("C", 1, 3), obs("D", 0, 0)}};
  const Histogram h = population_histogram(s, HistogramAxis::viewers_per_game);
  CHECK(h.bins == std::vector<std::pair<std::int64_t, std::size_t>>{{0, 1}, {3, 1}, {10, 2}});
  CHECK(h.total() == 4);
  CHECK(to_tsv(h) == "viewers\tgames\n0\t1\n3\t1\n10\t2\n");
  const Histogram st = population_histogram(s, HistogramAxis::streamers_per_game);
  CHECK(st.bins == std::vector<std::pair<std::int64_t, std::size_t>>{{0, 1}, {1, 2}, {2, 1}});
  CHECK(population_histogram(Snapshot{1, {}}, HistogramAxis::viewers_per_game).bins.empty());
  CHECK_THROWS_AS(population_histogram(s, HistogramAxis::viewers_per_stream), MissingStreamDetail);

  GameObservation a = obs("A", 2, 7);
  a.stream_viewers = std::vector<std::int64_t>{5, 2};
  GameObservation b = obs("B", 1, 5);
  b.stream_viewers = std::vector<std::int64_t>{5};
  const Histogram ps = population_histogram(Snapshot{1, {a, b}}, HistogramAxis::viewers_per_stream);
  CHECK(ps.bins == std::vector<std::pair<std::int64_t, std::size_t>>{{2, 1}, {5, 2}});
}

TEST_CASE("power-law MLE") {
  const std::vector<double> ee = {std::numbers::e, std::numbers::e};
  CHECK(fit_power_law(ee, 1.0).alpha == doctest::Approx(2.0));
  CHECK(fit_power_law(ee, 1.0).n_tail == 2);
  const std::vector<double> flat = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(fit_power_law(flat, 1.0), InsufficientTail);
  const std::vector<double> one = {5.0, 0.5};
  CHECK_THROWS_AS(fit_power_law(one, 1.0), InsufficientTail);
  CHECK_THROWS_AS(fit_power_law(ee, 0.0), DomainError);

  const auto samples = power_law_samples(10000, 2.5, 1.0, 17);
  const double alpha = fit_power_law(samples, 1.0).alpha;
  CHECK(alpha > 2.4);
  CHECK(alpha < 2.6);
}

TEST_CASE("power-law fit is scale-equivariant in xmin") {
  const auto samples = power_law_samples(2000, 2.2, 7.0, 3);
  std::vector<double> scaled;
  for (double x : samples) scaled.push_back(x / 7.0);
  CHECK(fit_power_law(samples, 7.0).alpha == doctest::Approx(fit_power_law(scaled, 1.0).alpha).epsilon(1e-12));
}

TEST_CASE("log-log histogram slope recovers the exponent of integer samples") {
  const auto samples = power_law_samples(20000, 2.5, 10.0, 9);
  std::vector<std::int64_t> ints;
  for (double x : samples) ints.push_back(static_cast<std::int64_t>(std::floor(x)));
  const LogLogFit fit = loglog_fit(count_histogram(ints, "x", "n"), 10.0);
  CHECK(-fit.slope == doctest::Approx(2.5).epsilon(0.12));
  CHECK(fit.points.size() >= 5);
}

TEST_CASE("totals and their conservation against per-game series") {
  const std::vector<Snapshot> snaps = {{900, {obs("A", 1, 10), obs("B", 2, 5)}}, {1800, {obs("A", 3, 4)}}};
  const Totals t = totals_series(snaps);
  CHECK(t.viewers == std::vector<std::int64_t>{15, 4});
  CHECK(t.streamers == std::vector<std::int64_t>{3, 3});
  const SeriesMap m = build_series(snaps, 900);
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    std::int64_t sum = 0;
    for (const auto& [g, s] : m) sum += s.viewers[i];
    CHECK(sum == t.viewers[i]);
  }
}

TEST_CASE("autocorrelation of a sinusoid and of white noise") {
  std::vector<double> wave(96 * 12);
  for (std::size_t i = 0; i < wave.size(); ++i) wave[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 96.0);
  CHECK(autocorrelation(wave, 96) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(autocorrelation(wave, 48) == doctest::Approx(-1.0).epsilon(1e-6));

  Rng rng(123);
  std::vector<double> noise(10000);
  std::normal_distribution<double> normal;
  for (auto& x : noise) x = normal(rng);
  CHECK(std::abs(autocorrelation(noise, 96)) < 0.05);

  const std::vector<double> constant(50, 3.0);
  CHECK(autocorrelation(constant, 5) == 0.0);
  CHECK_THROWS_AS(autocorrelation(constant, 0), DomainError);
  CHECK_THROWS_AS(autocorrelation(constant, 50), DomainError);
}

TEST_CASE("diurnal and weekend diagnostics recover the synthetic configuration") {
  SynthConfig cfg;
  cfg.n_games = 200;
  cfg.n_snapshots = 96 * 21;
  cfg.daily_amplitude = 2.0;
  cfg.weekend_uplift = 1.0;
  cfg.emit_metadata = false;
  cfg.seed = 4;
  const SynthCorpus c = generate_corpus(cfg);
  const Totals t = totals_series(c.snapshots);
  const double ratio = peak_to_trough(daily_profile(t.ts, t.viewers, 900));
  CHECK(ratio > 2.0 * 0.8);
  CHECK(ratio < 2.0 * 1.2);
  std::vector<double> tv(t.viewers.begin(), t.viewers.end());
  CHECK(autocorrelation(tv, 96) > 0.5);

  cfg.daily_amplitude = 1.0;
  cfg.weekend_uplift = 1.3;
  const SynthCorpus w = generate_corpus(cfg);
  const Totals tw = totals_series(w.snapshots);
  CHECK(weekend_uplift(tw.ts, tw.viewers) == doctest::Approx(1.3).epsilon(0.05));
}

TEST_CASE("weekend uplift uses UTC weekdays") {
  // 2016-04-09 was a Saturday, 2016-04-11 a Monday.
  const std::vector<std::int64_t> ts = {1460160000, 1460332800};
  const std::vector<std::int64_t> v = {30, 10};
  CHECK(weekend_uplift(ts, v) == doctest::Approx(3.0));
  const std::vector<std::int64_t> only_monday = {1460332800};
  const std::vector<std::int64_t> one = {10};
  CHECK_THROWS_AS(weekend_uplift(only_monday, one), DomainError);
}

TEST_CASE("events per game: histogram and ranked table") {
  CHECK(events_per_game({}).histogram.bins.empty());
  CHECK(events_per_game({}).top.empty());
  std::vector<ChangeEvent> events;
  for (const char* g : {"B", "A", "C", "A", "B", "A", "B"}) events.push_back({g, 96, 1, 0.5, 0.01});
  const EventsPerGame e = events_per_game(events, 3);
  CHECK(e.histogram.bins == std::vector<std::pair<std::int64_t, std::size_t>>{{1, 1}, {3, 2}});
  REQUIRE(e.top.size() == 3);
  CHECK(e.top[0].first == "A");
  CHECK(e.top[1].first == "B");
  CHECK(e.top[2].first == "C");
  std::size_t weighted = 0;
  for (const auto& [value, count] : e.histogram.bins) weighted += static_cast<std::size_t>(value) * count;
  CHECK(weighted == events.size());
  CHECK(events_per_game(events, 1).top.size() == 1);
}
