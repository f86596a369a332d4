#!/usr/bin/env python3
# Copyright 2026 The posegan Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes golden_manifest.jsonl: one 910x512 60 fps video (200 kept frames
after stride 2) plus three header-only videos that fail quality checks.

Strided frame layout:
  0-39    pass, box center x 0.2
  40      two confident boxes, no overlap
  41-69   pass (29 frames, too short)
  70      single box, score 0.97
  71-110  pass, box center x 0.6
  111     pose total 9.0
  112     second pose candidate with total 3.0
  113     box area 3%
  114     neck score 0.2
  115-150 pass, box center x 0.9
  151     no detections
  152     single box, score 0.94
  153     box area 85.5%
  154-199 pass, box center x 0.3 (even) / 0.5 (odd); 154 has an overlapping
          0.96 box, 160 a 0.5 box, 170 a tiny 0.97 box, 180 exactly 8 body
          keypoints visible, 190 a second candidate with total 2.0
"""

import json
import os

OFFSETS = [
    (0.0, -0.25), (0.0, -0.18), (-0.06, -0.18), (-0.08, -0.08), (-0.09, 0.0), (0.06, -0.18),
    (0.08, -0.08), (0.09, 0.0), (-0.04, 0.02), (-0.04, 0.14), (-0.04, 0.26), (0.04, 0.02),
    (0.04, 0.14), (0.04, 0.26), (-0.015, -0.265), (0.015, -0.265), (-0.03, -0.26), (0.03, -0.26),
]


def box(cx, w=0.2, h=0.6, cy=0.5):
    return [cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2]


def pose(cx, scores):
    return {"keypoints": [[cx + dx, 0.5 + dy, s] for (dx, dy), s in zip(OFFSETS, scores)]}


def frame(t, detections, poses):
    return {"type": "frame", "video_id": "golden", "frame": 2 * t, "detections": detections, "poses": poses}


def passing(t, cx):
    return frame(t, [{"bbox": box(cx), "score": 0.99}], [pose(cx, [0.9] * 18)])


def records():
    yield {"type": "video", "video_id": "golden", "width": 910, "height": 512, "fps": 60.0,
           "total_bits": 1.0 * 400 * 910 * 512, "frame_count": 400}
    yield {"type": "video", "video_id": "lowres", "width": 320, "height": 240, "fps": 30.0,
           "total_bits": 2.0 * 100 * 320 * 240, "frame_count": 100}
    yield {"type": "video", "video_id": "lowbpp", "width": 640, "height": 480, "fps": 30.0,
           "total_bits": 0.5 * 100 * 640 * 480, "frame_count": 100}
    yield {"type": "video", "video_id": "badfps", "width": 640, "height": 480, "fps": 45.0,
           "total_bits": 1.0 * 100 * 640 * 480, "frame_count": 100}
    for t in range(200):
        if t < 40:
            yield passing(t, 0.2)
        elif t == 40:
            yield frame(t, [{"bbox": box(0.2), "score": 0.97}, {"bbox": box(0.7), "score": 0.96}],
                        [pose(0.2, [0.9] * 18)])
        elif t < 70:
            yield passing(t, 0.2)
        elif t == 70:
            yield frame(t, [{"bbox": box(0.6), "score": 0.97}], [pose(0.6, [0.9] * 18)])
        elif t < 111:
            yield passing(t, 0.6)
        elif t == 111:
            yield frame(t, [{"bbox": box(0.6), "score": 0.99}], [pose(0.6, [0.5] * 18)])
        elif t == 112:
            yield frame(t, [{"bbox": box(0.6), "score": 0.99}],
                        [pose(0.6, [0.9] * 18), pose(0.3, [3.0 / 18] * 18)])
        elif t == 113:
            yield frame(t, [{"bbox": box(0.6, w=0.1, h=0.3), "score": 0.99}], [pose(0.6, [0.9] * 18)])
        elif t == 114:
            scores = [0.9] * 18
            scores[1] = 0.2
            yield frame(t, [{"bbox": box(0.6), "score": 0.99}], [pose(0.6, scores)])
        elif t < 151:
            yield passing(t, 0.9)
        elif t == 151:
            yield frame(t, [], [pose(0.5, [0.9] * 18)])
        elif t == 152:
            yield frame(t, [{"bbox": box(0.5), "score": 0.94}], [pose(0.5, [0.9] * 18)])
        elif t == 153:
            yield frame(t, [{"bbox": box(0.5, w=0.9, h=0.95), "score": 0.99}], [pose(0.5, [0.9] * 18)])
        else:
            cx = 0.3 if t % 2 == 0 else 0.5
            rec = passing(t, cx)
            if t == 154:
                rec["detections"].append({"bbox": box(cx + 0.02), "score": 0.96})
            elif t == 160:
                rec["detections"].append({"bbox": box(0.8), "score": 0.5})
            elif t == 170:
                rec["detections"].append({"bbox": box(0.8, w=0.05, h=0.1), "score": 0.97})
            elif t == 180:
                visible = {0, 1, 2, 5, 8, 9, 11, 12}
                rec["poses"] = [pose(cx, [0.95 if k in visible else 0.29 for k in range(18)])]
            elif t == 190:
                rec["poses"].append(pose(0.8, [2.0 / 18] * 18))
            yield rec


if __name__ == "__main__":
    path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden_manifest.jsonl")
    with open(path, "w") as f:
        for r in records():
            f.write(json.dumps(r) + "\n")
