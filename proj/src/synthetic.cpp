#include "buggin/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "buggin/random.hpp"

namespace buggin {

namespace {

constexpr std::array<const char*, 8> kProjects = {"nova", "neutron", "cinder", "glance",
                                                  "keystone", "swift", "heat", "horizon"};
constexpr std::array<const char*, 24> kSubjects = {
    "scheduler", "volume attach", "port binding", "image upload", "token cache", "quota check",
    "live migration", "api response", "database sync", "config parser", "floating ip", "snapshot",
    "metadata service", "console log", "resize", "rpc timeout", "policy rule", "instance boot",
    "network agent", "dashboard panel", "object replicator", "stack update", "keypair import", "host aggregate"};
constexpr std::array<const char*, 12> kIntrinsicTemplates = {
    "regression in %s after recent refactor",
    "typo in %s error message",
    "%s regression breaks existing deployments",
    "fix typo in %s docstring",
    "%s regression when handling empty list",
    "typo causes %s to read wrong option",
    "regression: %s returns stale data",
    "%s crashes due to typo in key name",
    "performance regression in %s",
    "typo in %s variable name",
    "%s regression introduced by cleanup",
    "wrong default from typo in %s"};
constexpr std::array<const char*, 12> kOtherTemplates = {
    "%s fails with newer libvirt release",
    "%s times out behind corporate proxy",
    "document how to configure %s",
    "%s unavailable when upstream mirror is down",
    "add support for ipv6 in %s",
    "%s slow on older kernel",
    "%s broken by third party driver update",
    "question about %s behaviour",
    "%s needs more logging",
    "%s fails on python 3.12 environment",
    "feature request: expose %s via cli",
    "%s incompatible with new oslo release"};
constexpr std::array<const char*, 6> kDescriptions = {
    "Steps to reproduce: deploy %s and run the usual tempest job. See https://review.example.org/c/%u for logs.",
    "After commit %07x the %s path behaves differently. Expected the old behaviour.",
    "Traceback (most recent call last):\n  File \"service.py\", line %u, in run\n    raise Error\nObserved on %s.",
    "The %s component reports an error when %s is restarted. Environment details attached.",
    "We see this intermittently in the gate for %s; www.example.com/logs/%u has the console output.",
    "Reported by operators running %s in production; no reproducer yet."};

std::string fill(const char* tmpl, const char* subject) {
  char buf[256];
  std::snprintf(buf, sizeof buf, tmpl, subject);
  return buf;
}

std::string describe_report(Pcg32& rng, const char* project, const char* subject) {
  char buf[512];
  const auto which = rng.bounded(kDescriptions.size());
  const unsigned num = 1000 + static_cast<unsigned>(rng.bounded(90000));
  switch (which) {
    case 0:
      std::snprintf(buf, sizeof buf, kDescriptions[0], project, num);
      break;
    case 1:
      std::snprintf(buf, sizeof buf, kDescriptions[1], 0x1000000u + num * 2654435761u % 0xe000000u, subject);
      break;
    case 2:
      std::snprintf(buf, sizeof buf, kDescriptions[2], num % 900, project);
      break;
    case 3:
      std::snprintf(buf, sizeof buf, kDescriptions[3], subject, kProjects[rng.bounded(kProjects.size())]);
      break;
    case 4:
      std::snprintf(buf, sizeof buf, kDescriptions[4], project, num);
      break;
    default:
      std::snprintf(buf, sizeof buf, "%s", kDescriptions[5]);
      std::string s(buf);
      const auto pos = s.find("%s");
      if (pos != std::string::npos) s.replace(pos, 2, project);
      return s;
  }
  return buf;
}

}  // namespace

std::vector<BugReport> synthetic_reports(const SyntheticCorpusSpec& spec) {
  Pcg32 rng(derive_seed(spec.seed, "synthetic-corpus"));
  std::vector<int> labels;
  labels.insert(labels.end(), spec.n_intrinsic, 1);
  labels.insert(labels.end(), spec.n_non_intrinsic, 0);
  shuffle(std::span<int>(labels), rng);

  std::vector<BugReport> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    BugReport r;
    char id[32];
    std::snprintf(id, sizeof id, "SYN-%04zu", i + 1);
    r.bug_id = id;
    const char* project = kProjects[rng.bounded(kProjects.size())];
    const char* subject = kSubjects[rng.bounded(kSubjects.size())];
    r.project = project;
    if (labels[i] == 1) {
      r.title = fill(kIntrinsicTemplates[rng.bounded(kIntrinsicTemplates.size())], subject);
      r.is_bug = true;
      r.has_bic = true;
    } else {
      r.title = fill(kOtherTemplates[rng.bounded(kOtherTemplates.size())], subject);
      switch (rng.bounded(3)) {
        case 0: r.is_bug = true; r.has_bic = false; break;
        case 1: r.is_bug = false; r.has_bic = false; break;
        default: r.is_bug = false; r.has_bic = true; break;
      }
    }
    r.description = describe_report(rng, project, subject);
    out.push_back(std::move(r));
  }
  return out;
}

EmbeddingTable synthetic_embeddings(const Corpus& corpus, std::size_t dimension, double separation,
                                    std::uint64_t seed) {
  EmbeddingTable t;
  t.model_name = "synthetic-gaussian";
  t.dimension = dimension;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus.reports()[i];
    Pcg32 rng(derive_seed(seed, "synthetic-embedding", fnv1a64(r.bug_id)));
    std::vector<double> v(dimension);
    for (std::size_t d = 0; d < dimension; ++d) {
      // Box-Muller
      const double u1 = 1.0 - rng.next_double();
      const double u2 = rng.next_double();
      v[d] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    if (dimension > 0) v[0] += corpus.labels()[i] == Label::Intrinsic ? separation / 2 : -separation / 2;
    t.vectors.emplace(r.bug_id, std::move(v));
  }
  t.manifest = {{"model_name", t.model_name}, {"dimension", dimension}, {"count", corpus.size()}};
  return t;
}

}  // namespace buggin
