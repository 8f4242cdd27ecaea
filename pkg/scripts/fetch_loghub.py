#!/usr/bin/env python3
"""Download the public Loghub Apache logs into ./data for the dataset checks.

    python scripts/fetch_loghub.py [--dest data] [--sample-url URL] [--full-url URL]

Writes data/Apache_2k.log (2,000-line sample) and data/Apache.log (full
log, extracted from the archive).  Either can also be pointed to directly
with LENLOG_APACHE_2K / LENLOG_APACHE_LOG.
"""

import argparse
import io
import pathlib
import shutil
import sys
import tarfile
import urllib.request

SAMPLE_URL = "https://raw.githubusercontent.com/logpai/loghub/master/Apache/Apache_2k.log"
FULL_URL = "https://zenodo.org/records/8196385/files/Apache.tar.gz?download=1"


def fetch(url):
    print(f"fetching {url}", file=sys.stderr)
    with urllib.request.urlopen(url, timeout=120) as resp:
        return resp.read()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dest", default="data")
    ap.add_argument("--sample-url", default=SAMPLE_URL)
    ap.add_argument("--full-url", default=FULL_URL)
    ap.add_argument("--skip-full", action="store_true")
    args = ap.parse_args()

    dest = pathlib.Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "Apache_2k.log").write_bytes(fetch(args.sample_url))

    if not args.skip_full:
        blob = fetch(args.full_url)
        with tarfile.open(fileobj=io.BytesIO(blob)) as tar:
            member = next((m for m in tar.getmembers() if m.name.endswith("/Apache.log") or m.name == "Apache.log"), None)
            if member is None:
                sys.exit("Apache.log not found in archive")
            with tar.extractfile(member) as src, open(dest / "Apache.log", "wb") as out:
                shutil.copyfileobj(src, out)
    for name in ("Apache_2k.log", "Apache.log"):
        path = dest / name
        if path.exists():
            print(f"{path}: {path.stat().st_size} bytes")


if __name__ == "__main__":
    main()
