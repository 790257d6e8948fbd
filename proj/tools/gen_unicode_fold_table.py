#!/usr/bin/env python3
"""Regenerates src/corpus/unicode_fold_table.inc.

Each entry maps a non-ASCII code point to the ASCII text it folds to after
compatibility decomposition, combining-mark removal, lowercasing and
replacement of everything outside [a-z0-9] by a space (space runs collapsed).
Code points absent from the table fold to a single space. An empty string
means the code point is deleted outright (combining marks).
"""
import re
import string
import sys
import unicodedata

KEEP = set(string.ascii_lowercase + string.digits)


def fold(ch):
    s = unicodedata.normalize("NFKD", ch)
    s = "".join(c for c in s if not unicodedata.combining(c)).lower()
    s = "".join(c if c in KEEP else " " for c in s)
    return re.sub(" +", " ", s)


def main(out_path):
    rows = []
    for cp in range(0x80, 0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        folded = fold(chr(cp))
        if folded != " ":
            rows.append((cp, folded))
    with open(out_path, "w", encoding="ascii") as out:
        out.write("// Generated by tools/gen_unicode_fold_table.py from Unicode %s. Do not edit.\n"
                  % unicodedata.unidata_version)
        out.write("// clang-format off\n")
        for cp, folded in rows:
            out.write('{0x%05X, "%s"},\n' % (cp, folded))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/corpus/unicode_fold_table.inc")
