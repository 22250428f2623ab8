#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace newsent {

enum class TokenizerKind { wordpiece, byte_bpe };

const char* tokenizer_kind_name(TokenizerKind k);
TokenizerKind parse_tokenizer_kind(const std::string& name);

// Subword tokenizer over already-cleaned text. Wordpiece uses greedy
// longest-match with "##" continuations; byte_bpe is the byte-level BPE
// used by roberta checkpoints (vocab.json + merges.txt). encode() emits
// content ids only; special ids are added by the model.
class SubwordTokenizer {
public:
    SubwordTokenizer() = default; // empty; usable only after a factory assigns it

    static SubwordTokenizer wordpiece_from_file(const std::filesystem::path& vocab_txt);
    static SubwordTokenizer wordpiece_from_corpus(const std::vector<std::string>& texts,
                                                  std::size_t vocab_budget);
    static SubwordTokenizer bpe_from_files(const std::filesystem::path& vocab_json,
                                           const std::filesystem::path& merges_txt);

    TokenizerKind kind() const { return kind_; }
    int vocab_size() const { return static_cast<int>(id_to_piece_.size()); }

    int pad_id() const { return pad_id_; }
    int unk_id() const { return unk_id_; }
    int cls_id() const { return cls_id_; } // <s> for byte_bpe
    int sep_id() const { return sep_id_; } // </s> for byte_bpe

    std::vector<int> encode(std::string_view text) const;
    std::string piece(int id) const;
    // Inverse of encode up to whitespace: continuation pieces re-attach.
    std::string decode(const std::vector<int>& ids) const;

    // Writes the vocabulary files into dir and returns their names.
    std::vector<std::string> save(const std::filesystem::path& dir) const;
    static SubwordTokenizer load(const std::filesystem::path& dir, TokenizerKind kind);

private:
    void index_specials();
    void encode_word_wordpiece(std::string_view word, std::vector<int>& out) const;
    void encode_word_bpe(const std::string& mapped, std::vector<int>& out) const;
    int lookup(const std::string& piece) const;

    TokenizerKind kind_ = TokenizerKind::wordpiece;
    std::vector<std::string> id_to_piece_;
    std::unordered_map<std::string, int> piece_to_id_;
    std::unordered_map<std::string, int> merge_rank_; // "a b" -> rank
    std::vector<std::string> merges_raw_;
    int pad_id_ = -1, unk_id_ = -1, cls_id_ = -1, sep_id_ = -1, mask_id_ = -1;
};

} // namespace newsent
