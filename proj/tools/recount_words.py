#!/usr/bin/env python3
"""Brute-force recount of the lexical and message-length statistics straight
from a JSONL run log. Deliberately independent of the C++ pipeline: its own
tokenizer (Unicode letter/mark/number runs via unicodedata), its own
lowercasing (str.lower), its own filtering and ranking.

Output:
  language,game,rank,token,count     one block, ranked per (language, game)
  msglen,<game>,<language>,<sum>,<n> exact char sums per (game, language)
"""

import argparse
import json
import sys
import unicodedata
from collections import Counter, defaultdict
from pathlib import Path

GAME_TERMS = {
    "en": ["Option A", "Option B", "choose", "round"],
    "ar": ["الخيار أ", "الخيار ب", "اختر", "جولة"],
    "vn": ["Lựa chọn A", "Lựa chọn B", "chọn", "vòng"],
}


def tokenize(text):
    tokens, current = [], []
    for ch in text:
        if unicodedata.category(ch)[0] in ("L", "M", "N"):
            current.append(ch)
        elif current:
            tokens.append("".join(current).lower())
            current = []
    if current:
        tokens.append("".join(current).lower())
    return tokens


def load_stopwords(lexicon_dir, language):
    path = Path(lexicon_dir) / f"{language}.txt"
    if not path.exists():
        sys.exit(f"missing stopword list for language '{language}': {path}")
    return {line.strip().lower() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("log")
    parser.add_argument("--lexicons", default="lexicons")
    parser.add_argument("--top-k", type=int, default=5)
    parser.add_argument("--exclude", action="append", default=[])
    args = parser.parse_args()

    counts = defaultdict(Counter)            # (language, game) -> token counts
    excluded = defaultdict(set)              # (language, game) -> excluded tokens
    stopwords = {}
    msg_chars = defaultdict(int)             # (game, language) -> char sum
    msg_count = defaultdict(int)

    with open(args.log, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("status") != "completed" or not rec["factors"]["communication"]:
                continue
            lang = rec["factors"]["language"]
            game = rec["factors"]["game"]
            if lang not in stopwords:
                stopwords[lang] = load_stopwords(args.lexicons, lang)
            key = (lang, game)
            if not excluded[key]:
                terms = list(GAME_TERMS.get(lang, GAME_TERMS["en"])) + list(args.exclude)
                terms += [rec["options"]["a"], rec["options"]["b"]]
                for term in terms:
                    excluded[key].update(tokenize(term))
            for rnd in rec["rounds"]:
                for msg in rnd.get("messages", []):
                    text = msg["text"]
                    msg_chars[(game, lang)] += len(text)  # len() counts code points
                    msg_count[(game, lang)] += 1
                    for token in tokenize(text):
                        if token in stopwords[lang] or token in excluded[key]:
                            continue
                        counts[key][token] += 1

    print("language,game,rank,token,count")
    for (lang, game) in sorted(counts):
        ranked = sorted(counts[(lang, game)].items(), key=lambda kv: (-kv[1], kv[0]))
        for rank, (token, count) in enumerate(ranked[: args.top_k], start=1):
            print(f"{lang},{game},{rank},{token},{count}")
    for (game, lang) in sorted(msg_chars):
        print(f"msglen,{game},{lang},{msg_chars[(game, lang)]},{msg_count[(game, lang)]}")


if __name__ == "__main__":
    main()
