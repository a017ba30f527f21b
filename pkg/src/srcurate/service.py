"""HTTP front door for annotation campaigns.

Endpoints (structured JSON bodies):

* ``GET /api/task?annotator=T`` -- the pending task with image URLs and
  the display permutation, or ``{"done": true}``.
* ``POST /api/labels`` -- ``{annotator, group, labels{variant: label},
  elapsed_ms}``; 200 on success, 400 on invalid input, 409 on duplicate.
* ``GET /api/progress?annotator=T`` -- per-annotator or campaign-wide.
* ``GET /img/{patch_id}`` -- PNG bytes for a patch reference.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .campaign import (
    Campaign,
    DuplicateSubmissionError,
    GroupEntry,
    InvalidSubmissionError,
    UnknownAnnotatorError,
)


def load_campaign(config_path: str | Path) -> tuple[Campaign, dict[str, Path]]:
    """Build a campaign from a config file.

    Config keys: ``groups_manifest`` (JSONL from make-groups),
    ``annotators`` (list of tokens), ``per_group``, ``seed`` and
    ``log_path``.
    """
    config_path = Path(config_path)
    config = json.loads(config_path.read_text())
    manifest_path = Path(config["groups_manifest"])
    if not manifest_path.is_absolute():
        manifest_path = config_path.parent / manifest_path
    groups: list[GroupEntry] = []
    patch_files: dict[str, Path] = {}
    with open(manifest_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            gid = obj["group_id"]
            orig_id = f"{gid}/orig"
            patch_files[orig_id] = manifest_path.parent / obj["original_path"]
            variant_refs = {}
            for variant in obj["variants"]:
                vid = int(variant["model_id"])
                ref = f"{gid}/m{vid}"
                patch_files[ref] = manifest_path.parent / variant["path"]
                variant_refs[vid] = ref
            groups.append(GroupEntry(group_id=gid, original_ref=orig_id,
                                     variant_refs=variant_refs))
    log_path = config.get("log_path", "records.jsonl")
    log_path = Path(log_path)
    if not log_path.is_absolute():
        log_path = config_path.parent / log_path
    campaign = Campaign(
        groups=groups,
        annotator_ids=list(config["annotators"]),
        per_group=int(config.get("per_group", 3)),
        seed=int(config.get("seed", 0)),
        log_path=log_path,
    )
    return campaign, patch_files


def create_app(campaign: Campaign, patch_files: dict[str, Path] | None = None,
               ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="srcurate annotation service")
    patch_files = patch_files or {}

    @app.get("/api/task")
    def get_task(annotator: str = Query(...)):
        try:
            task = campaign.next_task(annotator)
        except UnknownAnnotatorError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        if task is None:
            progress = campaign.progress(annotator)
            return {"done": True, "labeled": progress["labeled"]}
        return {
            "done": False,
            "group_id": task.group_id,
            "original_url": f"/img/{task.original_ref}",
            "slots": [
                {"slot": i, "variant_id": vid, "url": f"/img/{ref}"}
                for i, (vid, ref) in enumerate(task.slots)
            ],
        }

    @app.post("/api/labels")
    async def post_labels(request: Request):
        body = await request.json()
        try:
            labels = {int(k): v for k, v in body["labels"].items()}
            ack = campaign.submit_labels(
                annotator_id=body["annotator"],
                group_id=body["group"],
                labels=labels,
                elapsed_ms=int(body["elapsed_ms"]),
            )
        except UnknownAnnotatorError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except DuplicateSubmissionError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (InvalidSubmissionError, KeyError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return JSONResponse({"ok": True, "progress": ack})

    @app.get("/api/progress")
    def get_progress(annotator: str | None = Query(default=None)):
        try:
            return campaign.progress(annotator)
        except UnknownAnnotatorError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/img/{patch_id:path}")
    def get_image(patch_id: str):
        path = patch_files.get(patch_id)
        if path is None or not Path(path).exists():
            raise HTTPException(status_code=404, detail=f"unknown patch: {patch_id}")
        return FileResponse(path, media_type="image/png")

    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
