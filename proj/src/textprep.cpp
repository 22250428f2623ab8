#include "newsent/textprep.hpp"

#include "newsent/util.hpp"

#include <cctype>
#include <cstring>

namespace newsent {
namespace {

// key<TAB>value lines, '#' comments, blank lines ignored
std::unordered_map<std::string, std::string> load_pair_file(const std::filesystem::path& p,
                                                            bool lower_keys) {
    std::unordered_map<std::string, std::string> out;
    for (const std::string& line : split(read_file(p), '\n')) {
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            fail_data(p.string() + ": expected key<TAB>value, got '" + line + "'");
        std::string key(trim(line.substr(0, tab)));
        std::string value(trim(line.substr(tab + 1)));
        if (key.empty() || value.empty())
            fail_data(p.string() + ": empty key or value in '" + line + "'");
        if (lower_keys) key = to_lower_ascii(key);
        out[key] = value;
    }
    return out;
}

struct Utf8Char {
    char32_t cp;
    std::size_t len;
};

Utf8Char decode_utf8(std::string_view s, std::size_t i) {
    unsigned char c = s[i];
    if (c < 0x80) return {c, 1};
    std::size_t len = (c >= 0xF0) ? 4 : (c >= 0xE0) ? 3 : (c >= 0xC0) ? 2 : 1;
    if (len == 1 || i + len > s.size()) return {0xFFFD, 1};
    char32_t cp = c & (0x7F >> len);
    for (std::size_t k = 1; k < len; ++k) {
        unsigned char cc = s[i + k];
        if ((cc & 0xC0) != 0x80) return {0xFFFD, 1};
        cp = (cp << 6) | (cc & 0x3F);
    }
    return {cp, len};
}

std::string strip_urls(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    auto matches = [&](const char* pat) {
        std::size_t n = std::strlen(pat);
        if (i + n > raw.size()) return false;
        for (std::size_t k = 0; k < n; ++k)
            if (std::tolower(static_cast<unsigned char>(raw[i + k])) != pat[k]) return false;
        return true;
    };
    while (i < raw.size()) {
        if (matches("http://") || matches("https://") || matches("www.")) {
            while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
            out += ' ';
            continue;
        }
        out += raw[i++];
    }
    return out;
}

// Lowercases ascii, replaces known emoji with their names, normalizes curly
// apostrophes, and turns every other non-ascii codepoint into a space.
std::string to_ascii_lower(std::string_view s, const CleanLexicons& lex) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = s[i];
        if (c < 0x80) {
            out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                          : static_cast<char>(c);
            ++i;
            continue;
        }
        bool replaced = false;
        std::size_t maxlen = std::min(lex.max_emoji_bytes, s.size() - i);
        for (std::size_t len = maxlen; len >= 2; --len) {
            auto it = lex.emoji.find(std::string(s.substr(i, len)));
            if (it != lex.emoji.end()) {
                out += ' ';
                out += it->second;
                out += ' ';
                i += len;
                replaced = true;
                break;
            }
        }
        if (replaced) continue;
        auto [cp, len] = decode_utf8(s, i);
        if (cp == 0x2019 || cp == 0x02BC) out += '\''; // curly apostrophes
        else out += ' ';
        i += len;
    }
    return out;
}

void append_words(std::vector<std::string>& tokens, const std::string& phrase) {
    for (const std::string& w : split(phrase, ' '))
        if (!w.empty()) tokens.push_back(w);
}

std::string clean_impl(std::string_view raw, const CleanLexicons& lex, bool tweet) {
    std::string ascii = to_ascii_lower(strip_urls(raw), lex);

    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < ascii.size()) {
        while (i < ascii.size() && std::isspace(static_cast<unsigned char>(ascii[i]))) ++i;
        std::size_t start = i;
        while (i < ascii.size() && !std::isspace(static_cast<unsigned char>(ascii[i]))) ++i;
        if (start == i) break;
        std::string tok = ascii.substr(start, i - start);

        if (tweet && tokens.empty() && tok == "rt") continue;
        if (tok[0] == '@') continue;
        if (tweet) {
            auto it = lex.emoticons.find(tok);
            if (it != lex.emoticons.end()) {
                append_words(tokens, it->second);
                continue;
            }
        }

        // remaining punctuation splits tokens rather than gluing them
        std::string mapped;
        mapped.reserve(tok.size());
        for (char ch : tok) {
            if ((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '\'') mapped += ch;
            else mapped += ' ';
        }
        for (std::string w : split(mapped, ' ')) {
            std::size_t b = 0, e = w.size();
            while (b < e && w[b] == '\'') ++b;
            while (e > b && w[e - 1] == '\'') --e;
            w = w.substr(b, e - b);
            if (w.empty()) continue;
            auto it = lex.contractions.find(w);
            if (it != lex.contractions.end()) append_words(tokens, it->second);
            else tokens.push_back(std::move(w));
        }
    }

    std::string out;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        if (t) out += ' ';
        out += tokens[t];
    }
    return out;
}

} // namespace

CleanLexicons CleanLexicons::load(const std::filesystem::path& data_dir) {
    CleanLexicons lex;
    lex.contractions = load_pair_file(data_dir / "contractions.txt", true);
    lex.emoticons = load_pair_file(data_dir / "emoticons.txt", true);
    lex.emoji = load_pair_file(data_dir / "emoji_map.txt", false);
    for (auto& [key, name] : lex.emoji) {
        lex.max_emoji_bytes = std::max(lex.max_emoji_bytes, key.size());
        for (char& c : name)
            if (c == '_') c = ' ';
    }
    return lex;
}

std::string clean_for_model(std::string_view raw, const CleanLexicons& lex) {
    return clean_impl(raw, lex, false);
}

std::string clean_tweet(std::string_view raw, const CleanLexicons& lex) {
    return clean_impl(raw, lex, true);
}

StopwordPolicy StopwordPolicy::load(const std::filesystem::path& base_file,
                                    const std::filesystem::path& extra_file, bool apply_extras) {
    StopwordPolicy p;
    p.apply_extras = apply_extras;
    for (const std::string& line : split(read_file(base_file), '\n')) {
        std::string tok(trim(line));
        if (tok.empty() || tok[0] == '#') continue;
        p.base.insert(to_lower_ascii(tok));
    }
    if (p.base.empty()) fail_data(base_file.string() + ": no stop words loaded");

    std::string category;
    for (const std::string& line : split(read_file(extra_file), '\n')) {
        std::string tok(trim(line));
        if (tok.empty() || tok[0] == '#') continue;
        if (tok.front() == '[' && tok.back() == ']') {
            category = to_lower_ascii(trim(tok.substr(1, tok.size() - 2)));
            if (category.empty()) fail_data(extra_file.string() + ": empty category header");
            p.extra_categories[category];
            continue;
        }
        if (category.empty())
            fail_data(extra_file.string() + ": token '" + tok + "' before any [category] header");
        p.extra_categories[category].insert(to_lower_ascii(tok));
    }
    return p;
}

StopwordPolicy StopwordPolicy::from_data_dir(const std::filesystem::path& data_dir,
                                             bool apply_extras) {
    return load(data_dir / "stopwords_base.txt", data_dir / "stopwords_extra.txt", apply_extras);
}

bool StopwordPolicy::is_stopword(std::string_view token) const {
    std::string t(token);
    if (base.count(t)) return true;
    if (apply_extras) {
        for (const auto& [name, setw] : extra_categories)
            if (setw.count(t)) return true;
    }
    return false;
}

std::vector<std::string> tokenize_for_ngrams(std::string_view cleaned,
                                             const StopwordPolicy& policy) {
    std::vector<std::string> out;
    for (const std::string& tok : split(std::string(cleaned), ' ')) {
        if (tok.empty()) continue;
        if (tok.find_first_not_of("0123456789") == std::string::npos) continue;
        if (policy.is_stopword(tok)) continue;
        out.push_back(tok);
    }
    return out;
}

} // namespace newsent
