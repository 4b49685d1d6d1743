"""S3 operations for publishing run artifacts and manifests."""

import json
import logging
import os
from typing import List, Optional, Tuple

import boto3

logger = logging.getLogger(__name__)

S3_URI_ENV_VAR = "CS_PAT_S3_URI"
MANIFEST_NAME = "manifest.json"


def _get_client(s3_client=None):
    """Get an S3 client."""
    if s3_client is None:
        s3_client = boto3.client("s3")
    return s3_client


def parse_s3_uri(uri: str) -> Tuple[str, str]:
    """Split s3://bucket/prefix into (bucket, prefix without trailing slash)."""
    if not uri.startswith("s3://"):
        raise ValueError(f"not an s3 uri: {uri!r}")
    bucket, _, prefix = uri[len("s3://"):].partition("/")
    if not bucket:
        raise ValueError(f"s3 uri has no bucket: {uri!r}")
    return bucket, prefix.strip("/")


def _key(prefix: str, *parts: str) -> str:
    return "/".join(p for p in (prefix, *parts) if p)


def upload_artifact(
    bucket: str,
    prefix: str,
    run_id: str,
    relative_path: str,
    file_path: str,
    s3_client=None,
) -> str:
    """Upload one artifact to <prefix>/<run_id>/<relative_path>."""
    client = _get_client(s3_client)
    key = _key(prefix, run_id, relative_path)
    client.upload_file(file_path, bucket, key)
    return key


def write_manifest(
    bucket: str,
    prefix: str,
    run_id: str,
    manifest: dict,
    s3_client=None,
) -> str:
    client = _get_client(s3_client)
    key = _key(prefix, run_id, MANIFEST_NAME)
    payload = json.dumps(manifest, sort_keys=True, indent=2)
    client.put_object(Bucket=bucket, Key=key, Body=payload)
    return key


def read_manifest(
    bucket: str,
    prefix: str,
    run_id: str,
    s3_client=None,
) -> Optional[dict]:
    """Read a published manifest. Returns None if not found."""
    client = _get_client(s3_client)
    key = _key(prefix, run_id, MANIFEST_NAME)
    try:
        response = client.get_object(Bucket=bucket, Key=key)
        body = response["Body"].read().decode("utf-8")
        return json.loads(body)
    except client.exceptions.NoSuchKey:
        return None


def publish_artifacts(
    manifest: dict,
    base_dir: str,
    s3_uri: str,
    s3_client=None,
) -> List[str]:
    """Upload every artifact listed in a manifest, then the manifest itself."""
    bucket, prefix = parse_s3_uri(s3_uri)
    client = _get_client(s3_client)
    run_id = manifest["run_id"]
    keys = []
    for artifact in manifest.get("artifacts", []):
        for rel in artifact["files"]:
            keys.append(upload_artifact(
                bucket, prefix, run_id, rel, os.path.join(base_dir, rel), s3_client=client,
            ))
    keys.append(write_manifest(bucket, prefix, run_id, manifest, s3_client=client))
    logger.info("Published %d objects to s3://%s/%s", len(keys), bucket, _key(prefix, run_id))
    return keys
