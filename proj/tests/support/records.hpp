#pragma once

#include <random>
#include <string>
#include <vector>

#include "ghs/domain.hpp"
#include "ghs/store.hpp"

namespace ghs::testing {

/// Records with every optional field independently absent some of the time,
/// drawn from small vocabularies so filters actually hit.
RepositoryRecord random_record(std::mt19937_64& rng, std::size_t index);
std::vector<RepositoryRecord> random_records(std::uint64_t seed, std::size_t n);

RepoFilter random_filter(std::mt19937_64& rng);

/// Brute-force reading of a filter, written against the record fields.
bool oracle_matches(const RepoFilter& f, const RepositoryRecord& r);
bool oracle_before(const RepositoryRecord& a, const RepositoryRecord& b, SortSpec sort);
std::vector<RepositoryRecord> oracle_query(const std::vector<RepositoryRecord>& all,
                                           const RepoFilter& f, SortSpec sort);

std::vector<std::string> names_of(const std::vector<RepositoryRecord>& rows);

/// A fully populated record with fixed values.
RepositoryRecord sample_record(const std::string& name = "apache/commons-lang");

/// The records behind tests/fixtures/export/three_records.csv.
std::vector<RepositoryRecord> export_seed_records();

}  // namespace ghs::testing
