// SPDX-License-Identifier: Apache-2.0
// Independent reference implementations used to cross-check the library.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "srr/config.hpp"
#include "srr/cwe_kb.hpp"
#include "srr/signature.hpp"

namespace srr::testing {

// Full (n+1)x(m+1) LCS table.
std::size_t oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Identifiers found by a regex scan that skips comments, strings and numbers.
std::vector<std::string> oracle_identifiers(const std::string& source);

struct Span {
  std::size_t pos;
  std::size_t len;
};
std::vector<Span> oracle_identifier_spans(const std::string& source);

// Adds comments full of lexicon words at line ends and before semicolons.
std::string mutate_add_comments(const std::string& source, std::mt19937_64& rng);

// Randomly flips the case of letters inside identifiers.
std::string mutate_identifier_case(const std::string& source, std::mt19937_64& rng);

// Lexicon patterns grepped over oracle_identifiers.
std::vector<std::string> oracle_signature(const std::string& source, const SignatureLexicon& lexicon);

struct OracleHit {
  std::string cwe_id;
  double score;
};

// Scores every record, sorts everything, then truncates.
std::vector<OracleHit> oracle_rank(const CweKnowledgeBase& kb, const DenseVector<double>& query, int k,
                                   FieldCombiner combiner);

}  // namespace srr::testing
