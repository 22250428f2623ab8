#include "newsent/tokenizer.hpp"

#include "newsent/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <map>

namespace newsent {
namespace {

bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '\'' || static_cast<unsigned char>(c) >= 0x80;
}

// Whitespace split, then runs of other punctuation become their own words.
std::vector<std::string> pre_split(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    };
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            flush();
        } else if (is_word_char(c)) {
            cur += c;
        } else {
            flush();
            words.emplace_back(1, c);
        }
    }
    flush();
    return words;
}

std::string encode_codepoint(unsigned cp) {
    std::string s;
    if (cp < 0x80) {
        s += static_cast<char>(cp);
    } else if (cp < 0x800) {
        s += static_cast<char>(0xC0 | (cp >> 6));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        s += static_cast<char>(0xE0 | (cp >> 12));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return s;
}

// The byte-level BPE alphabet: printable latin bytes map to themselves,
// everything else to 256+n in first-seen order, matching the published
// byte-to-unicode table.
const std::vector<std::string>& byte_to_unicode() {
    static const std::vector<std::string> table = [] {
        std::vector<int> bs;
        for (int b = '!'; b <= '~'; ++b) bs.push_back(b);
        for (int b = 0xA1; b <= 0xAC; ++b) bs.push_back(b);
        for (int b = 0xAE; b <= 0xFF; ++b) bs.push_back(b);
        std::vector<int> cs = bs;
        int n = 0;
        for (int b = 0; b < 256; ++b) {
            if (std::find(bs.begin(), bs.end(), b) == bs.end()) {
                bs.push_back(b);
                cs.push_back(256 + n++);
            }
        }
        std::vector<std::string> t(256);
        for (std::size_t i = 0; i < bs.size(); ++i)
            t[static_cast<std::size_t>(bs[i])] = encode_codepoint(static_cast<unsigned>(cs[i]));
        return t;
    }();
    return table;
}

const std::map<std::string, unsigned char>& unicode_to_byte() {
    static const std::map<std::string, unsigned char> inv = [] {
        std::map<std::string, unsigned char> m;
        const auto& t = byte_to_unicode();
        for (int b = 0; b < 256; ++b) m[t[static_cast<std::size_t>(b)]] = static_cast<unsigned char>(b);
        return m;
    }();
    return inv;
}

std::vector<std::string> split_utf8_chars(const std::string& s) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.size();) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : 4;
        len = std::min(len, s.size() - i);
        out.push_back(s.substr(i, len));
        i += len;
    }
    return out;
}

} // namespace

const char* tokenizer_kind_name(TokenizerKind k) {
    return k == TokenizerKind::wordpiece ? "wordpiece" : "byte_bpe";
}

TokenizerKind parse_tokenizer_kind(const std::string& name) {
    if (name == "wordpiece") return TokenizerKind::wordpiece;
    if (name == "byte_bpe") return TokenizerKind::byte_bpe;
    fail_data("unknown tokenizer kind: " + name);
}

int SubwordTokenizer::lookup(const std::string& piece) const {
    auto it = piece_to_id_.find(piece);
    return it == piece_to_id_.end() ? -1 : it->second;
}

void SubwordTokenizer::index_specials() {
    if (kind_ == TokenizerKind::wordpiece) {
        pad_id_ = lookup("[PAD]");
        unk_id_ = lookup("[UNK]");
        cls_id_ = lookup("[CLS]");
        sep_id_ = lookup("[SEP]");
        mask_id_ = lookup("[MASK]");
    } else {
        cls_id_ = lookup("<s>");
        pad_id_ = lookup("<pad>");
        sep_id_ = lookup("</s>");
        unk_id_ = lookup("<unk>");
    }
    if (pad_id_ < 0 || unk_id_ < 0 || cls_id_ < 0 || sep_id_ < 0)
        fail_data("tokenizer vocabulary is missing special tokens");
}

SubwordTokenizer SubwordTokenizer::wordpiece_from_file(const std::filesystem::path& vocab_txt) {
    SubwordTokenizer t;
    t.kind_ = TokenizerKind::wordpiece;
    std::string content = read_file(vocab_txt);
    for (auto line : split(content, '\n')) {
        std::string piece(trim(line));
        if (piece.empty()) continue;
        t.piece_to_id_.emplace(piece, static_cast<int>(t.id_to_piece_.size()));
        t.id_to_piece_.push_back(piece);
    }
    if (t.id_to_piece_.empty()) fail_data("empty wordpiece vocabulary: " + vocab_txt.string());
    t.index_specials();
    return t;
}

SubwordTokenizer SubwordTokenizer::wordpiece_from_corpus(const std::vector<std::string>& texts,
                                                         std::size_t vocab_budget) {
    std::map<std::string, std::uint64_t> freq;
    std::map<char, bool> chars;
    for (const auto& text : texts) {
        for (auto& w : pre_split(text)) {
            ++freq[w];
            for (char c : w) chars[c] = true;
        }
    }

    SubwordTokenizer t;
    t.kind_ = TokenizerKind::wordpiece;
    auto push = [&](const std::string& p) {
        if (t.piece_to_id_.emplace(p, static_cast<int>(t.id_to_piece_.size())).second)
            t.id_to_piece_.push_back(p);
    };
    for (const char* s : {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"}) push(s);
    for (auto& [c, _] : chars) {
        push(std::string(1, c));
        push("##" + std::string(1, c));
    }

    std::vector<std::pair<std::string, std::uint64_t>> by_freq(freq.begin(), freq.end());
    std::stable_sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [w, _] : by_freq) {
        if (t.id_to_piece_.size() >= vocab_budget) break;
        if (w.size() > 1) push(w);
    }
    t.index_specials();
    return t;
}

SubwordTokenizer SubwordTokenizer::bpe_from_files(const std::filesystem::path& vocab_json,
                                                  const std::filesystem::path& merges_txt) {
    SubwordTokenizer t;
    t.kind_ = TokenizerKind::byte_bpe;

    auto doc = nlohmann::json::parse(read_file(vocab_json), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        fail_data("cannot parse bpe vocabulary: " + vocab_json.string());
    std::size_t n = doc.size();
    t.id_to_piece_.assign(n, std::string());
    for (auto& [piece, idv] : doc.items()) {
        if (!idv.is_number_integer()) fail_data("non-integer id in " + vocab_json.string());
        int id = idv.get<int>();
        if (id < 0 || static_cast<std::size_t>(id) >= n)
            fail_data("bpe vocabulary ids are not dense in " + vocab_json.string());
        t.id_to_piece_[static_cast<std::size_t>(id)] = piece;
        t.piece_to_id_.emplace(piece, id);
    }

    std::string merges = read_file(merges_txt);
    int rank = 0;
    bool first = true;
    for (auto line : split(merges, '\n')) {
        std::string s(trim(line));
        if (first && s.rfind("#version", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        if (s.empty()) continue;
        t.merge_rank_.emplace(s, rank++);
        t.merges_raw_.push_back(s);
    }
    t.index_specials();
    return t;
}

void SubwordTokenizer::encode_word_wordpiece(std::string_view word, std::vector<int>& out) const {
    if (word.size() > 100) {
        out.push_back(unk_id_);
        return;
    }
    std::vector<int> pieces;
    std::size_t start = 0;
    while (start < word.size()) {
        std::size_t end = word.size();
        int found = -1;
        while (end > start) {
            std::string cand(word.substr(start, end - start));
            if (start > 0) cand = "##" + cand;
            if (int id = lookup(cand); id >= 0) {
                found = id;
                break;
            }
            --end;
        }
        if (found < 0) {
            out.push_back(unk_id_);
            return;
        }
        pieces.push_back(found);
        start = end;
    }
    out.insert(out.end(), pieces.begin(), pieces.end());
}

void SubwordTokenizer::encode_word_bpe(const std::string& mapped, std::vector<int>& out) const {
    std::vector<std::string> sym = split_utf8_chars(mapped);
    while (sym.size() >= 2) {
        int best_rank = -1;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
            auto it = merge_rank_.find(sym[i] + " " + sym[i + 1]);
            if (it != merge_rank_.end() && (best_rank < 0 || it->second < best_rank)) {
                best_rank = it->second;
                best_i = i;
            }
        }
        if (best_rank < 0) break;
        sym[best_i] += sym[best_i + 1];
        sym.erase(sym.begin() + static_cast<std::ptrdiff_t>(best_i) + 1);
    }
    for (const auto& s : sym) {
        int id = lookup(s);
        out.push_back(id < 0 ? unk_id_ : id);
    }
}

std::vector<int> SubwordTokenizer::encode(std::string_view text) const {
    std::vector<int> out;
    if (kind_ == TokenizerKind::wordpiece) {
        for (auto& w : pre_split(text)) encode_word_wordpiece(w, out);
    } else {
        auto words = pre_split(text);
        const auto& b2u = byte_to_unicode();
        for (std::size_t i = 0; i < words.size(); ++i) {
            std::string raw = i == 0 ? words[i] : " " + words[i];
            std::string mapped;
            for (unsigned char c : raw) mapped += b2u[c];
            encode_word_bpe(mapped, out);
        }
    }
    return out;
}

std::string SubwordTokenizer::piece(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_piece_.size())
        fail_data("token id out of range: " + std::to_string(id));
    return id_to_piece_[static_cast<std::size_t>(id)];
}

std::string SubwordTokenizer::decode(const std::vector<int>& ids) const {
    std::string out;
    if (kind_ == TokenizerKind::wordpiece) {
        for (int id : ids) {
            if (id == pad_id_ || id == cls_id_ || id == sep_id_ || id == mask_id_) continue;
            const std::string& p = piece(id);
            if (p.rfind("##", 0) == 0) {
                out += p.substr(2);
            } else {
                if (!out.empty()) out += ' ';
                out += p;
            }
        }
        return out;
    }
    const auto& u2b = unicode_to_byte();
    std::string bytes;
    for (int id : ids) {
        if (id == pad_id_ || id == cls_id_ || id == sep_id_) continue;
        for (auto& ch : split_utf8_chars(piece(id))) {
            auto it = u2b.find(ch);
            if (it != u2b.end()) bytes += static_cast<char>(it->second);
        }
    }
    if (!bytes.empty() && bytes.front() == ' ') bytes.erase(bytes.begin());
    return bytes;
}

std::vector<std::string> SubwordTokenizer::save(const std::filesystem::path& dir) const {
    if (kind_ == TokenizerKind::wordpiece) {
        std::string content;
        for (const auto& p : id_to_piece_) {
            content += p;
            content += '\n';
        }
        write_file(dir / "vocab.txt", content);
        return {"vocab.txt"};
    }
    nlohmann::json vocab = nlohmann::json::object();
    for (std::size_t i = 0; i < id_to_piece_.size(); ++i)
        vocab[id_to_piece_[i]] = static_cast<int>(i);
    write_file(dir / "vocab.json", vocab.dump());
    std::string merges = "#version: 0.2\n";
    for (const auto& m : merges_raw_) {
        merges += m;
        merges += '\n';
    }
    write_file(dir / "merges.txt", merges);
    return {"vocab.json", "merges.txt"};
}

SubwordTokenizer SubwordTokenizer::load(const std::filesystem::path& dir, TokenizerKind kind) {
    if (kind == TokenizerKind::wordpiece) return wordpiece_from_file(dir / "vocab.txt");
    return bpe_from_files(dir / "vocab.json", dir / "merges.txt");
}

} // namespace newsent
