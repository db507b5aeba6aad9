#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "buggin/corpus.hpp"

namespace buggin {

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1000};  // doubles on each retry
};

// Fetches `<endpoint>/bugs/<bug_id>` (Launchpad-style JSON with "title" and
// "description") and returns a report with both flags unset. The project
// field is filled from the payload's "project" or "target_name" key when
// present.
//
// Errors: NotFoundError on HTTP 404; TransportError after the retry budget
// is exhausted on timeouts, connection failures and 5xx; DecodeError when the
// body is not a JSON object with string title/description.
BugReport fetch_remote_report(const std::string& endpoint, const std::string& bug_id,
                              std::chrono::milliseconds timeout, const RetryPolicy& retry = {});

// Fills title/description of every report in `labeled` from the tracker.
// The returned corpus keeps the labels and project of the input rows.
Corpus fetch_corpus_text(const std::string& endpoint, const std::vector<BugReport>& labeled,
                         std::chrono::milliseconds timeout, const RetryPolicy& retry = {},
                         const std::function<void(std::size_t, std::size_t)>& progress = {});

}  // namespace buggin
