#pragma once

#include <filesystem>

namespace newsent {

// Writes the bundled deterministic fixtures (labelled tweets, mini article
// corpus, death series) into dir. Output is byte-stable across runs and
// platforms; tests compare regenerated bytes against the committed copies.
void write_fixture_tweets(const std::filesystem::path& dir);
void write_fixture_articles(const std::filesystem::path& dir);
void write_fixture_deaths(const std::filesystem::path& dir);
void write_all_fixtures(const std::filesystem::path& dir);

} // namespace newsent
