#!/usr/bin/env python3
"""Generates the bundled fixture set: meshes, cameras, images, mock backend
tables, survey data, reference scores, and the stored doll baseline grasp set.

Meshes are synthetic household-object stand-ins in meters, z-up, written as
Wavefront OBJ (triangles only). Everything downstream (camera files, VLM boxes,
rendered images, the doll grasp fixture) is derived here with independent
pinhole math so the bundled data is self-consistent.

Run from the repo root:  python3 scripts/gen_fixtures.py
"""

import json
import math
import os
import csv

from PIL import Image, ImageDraw

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIX = os.path.join(ROOT, "fixtures")

IMG_W, IMG_H = 640, 480
FX = FY = 500.0
CX, CY = 320.0, 240.0


# ---------------------------------------------------------------------------
# small vector helpers

def sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def mul(a, s):
    return (a[0] * s, a[1] * s, a[2] * s)


def dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a, b):
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def norm(a):
    return math.sqrt(dot(a, a))


def normalize(a):
    n = norm(a)
    return (a[0] / n, a[1] / n, a[2] / n)


# ---------------------------------------------------------------------------
# mesh assembly

class MeshBuilder:
    def __init__(self):
        self.vertices = []
        self.faces = []        # (i, j, k)
        self.face_part = []    # part name per face

    def add_piece(self, verts, tris, part, outward):
        """outward(p) gives the expected outward direction at point p; used to
        fix the winding of generated triangles."""
        base = len(self.vertices)
        self.vertices.extend(verts)
        for (a, b, c) in tris:
            pa, pb, pc = verts[a], verts[b], verts[c]
            n = cross(sub(pb, pa), sub(pc, pa))
            centroid = mul(add(add(pa, pb), pc), 1.0 / 3.0)
            if dot(n, outward(centroid)) < 0.0:
                b, c = c, b
            self.faces.append((base + a, base + b, base + c))
            self.face_part.append(part)

    def centroid(self, f):
        a, b, c = self.faces[f]
        return mul(add(add(self.vertices[a], self.vertices[b]), self.vertices[c]), 1.0 / 3.0)

    def part_vertices(self, part):
        out = set()
        for f, p in enumerate(self.face_part):
            if p == part:
                out.update(self.faces[f])
        return [self.vertices[i] for i in sorted(out)]


def grid_tris(nu, nv, wrap_u=False):
    tris = []
    cols = nu if wrap_u else nu + 1
    for i in range(nu):
        for j in range(nv):
            i1 = (i + 1) % cols if wrap_u else i + 1
            a = i * (nv + 1) + j
            b = i1 * (nv + 1) + j
            tris.append((a, b, b + 1))
            tris.append((a, b + 1, a + 1))
    return tris


def cylinder(builder, part, radius, z0, z1, n=24, cap_bottom=True, cap_top=False,
             center=(0.0, 0.0, 0.0)):
    verts = []
    for z in (z0, z1):
        for i in range(n):
            th = 2.0 * math.pi * i / n
            verts.append((center[0] + radius * math.cos(th),
                          center[1] + radius * math.sin(th),
                          center[2] + z))
    tris = []
    for i in range(n):
        i1 = (i + 1) % n
        a, b = i, i1
        c, d = n + i, n + i1
        tris.append((a, b, d))
        tris.append((a, d, c))
    axis = (center[0], center[1], None)

    def outward_wall(p):
        return (p[0] - center[0], p[1] - center[1], 0.0)

    builder.add_piece(verts, tris, part, outward_wall)
    if cap_bottom:
        cv = [(center[0], center[1], center[2] + z0)] + verts[:n]
        ct = [(0, 1 + i, 1 + (i + 1) % n) for i in range(n)]
        builder.add_piece(cv, ct, part, lambda p: (0.0, 0.0, -1.0))
    if cap_top:
        cv = [(center[0], center[1], center[2] + z1)] + verts[n:]
        ct = [(0, 1 + i, 1 + (i + 1) % n) for i in range(n)]
        builder.add_piece(cv, ct, part, lambda p: (0.0, 0.0, 1.0))


def sphere(builder, part, radius, center, n_lat=12, n_lon=18):
    verts = []
    for i in range(n_lat + 1):
        phi = math.pi * i / n_lat
        for j in range(n_lon + 1):
            th = 2.0 * math.pi * j / n_lon
            verts.append((center[0] + radius * math.sin(phi) * math.cos(th),
                          center[1] + radius * math.sin(phi) * math.sin(th),
                          center[2] + radius * math.cos(phi)))
    tris = grid_tris(n_lat, n_lon)
    # lat/lon grid duplicates the seam and poles; degenerate pole slivers are
    # filtered out by area below
    builder.add_piece(verts, tris, part, lambda p: sub(p, center))


def torus_arc(builder, part, R, r, center, phi0, phi1, n_arc=12, n_tube=10):
    """Tube swept in the x-z plane: arc center path
    c(phi) = center + R*(cos phi, 0, sin phi)."""
    verts = []
    centers = []
    for i in range(n_arc + 1):
        phi = phi0 + (phi1 - phi0) * i / n_arc
        c = (center[0] + R * math.cos(phi), center[1], center[2] + R * math.sin(phi))
        centers.append(c)
        r1 = (math.cos(phi), 0.0, math.sin(phi))
        r2 = (0.0, 1.0, 0.0)
        for j in range(n_tube + 1):
            ps = 2.0 * math.pi * j / n_tube
            d = add(mul(r1, math.cos(ps)), mul(r2, math.sin(ps)))
            verts.append(add(c, mul(d, r)))
    tris = grid_tris(n_arc, n_tube)

    def outward(p):
        best = min(centers, key=lambda c: norm(sub(p, c)))
        return sub(p, best)

    builder.add_piece(verts, tris, part, outward)


def cone(builder, part, apex, base_center, radius, n=24):
    verts = [apex]
    for i in range(n):
        th = 2.0 * math.pi * i / n
        verts.append((base_center[0] + radius * math.cos(th),
                      base_center[1] + radius * math.sin(th),
                      base_center[2]))
    tris = [(0, 1 + i, 1 + (i + 1) % n) for i in range(n)]
    axis = normalize(sub(base_center, apex))

    def outward(p):
        v = sub(p, apex)
        along = mul(axis, dot(v, axis))
        radial = sub(v, along)
        return radial if norm(radial) > 1e-12 else (0, 0, -1)

    builder.add_piece(verts, tris, part, outward)


def box(builder, part, center, half):
    hx, hy, hz = half
    corners = [(center[0] + sx * hx, center[1] + sy * hy, center[2] + sz * hz)
               for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
    quads = [  # (corner indices, outward axis)
        ((0, 1, 3, 2), (-1, 0, 0)), ((4, 6, 7, 5), (1, 0, 0)),
        ((0, 4, 5, 1), (0, -1, 0)), ((2, 3, 7, 6), (0, 1, 0)),
        ((0, 2, 6, 4), (0, 0, -1)), ((1, 5, 7, 3), (0, 0, 1)),
    ]
    for q, ax in quads:
        verts = [corners[i] for i in q]
        builder.add_piece(verts, [(0, 1, 2), (0, 2, 3)], part, lambda p, ax=ax: ax)


def drop_degenerate(builder, eps=1e-12):
    keep_f, keep_p = [], []
    for f, tri in enumerate(builder.faces):
        a, b, c = (builder.vertices[i] for i in tri)
        area = 0.5 * norm(cross(sub(b, a), sub(c, a)))
        if area > eps:
            keep_f.append(tri)
            keep_p.append(builder.face_part[f])
    builder.faces, builder.face_part = keep_f, keep_p
    used = sorted({i for tri in builder.faces for i in tri})
    remap = {old: new for new, old in enumerate(used)}
    builder.vertices = [builder.vertices[i] for i in used]
    builder.faces = [tuple(remap[i] for i in tri) for tri in builder.faces]


def write_obj(builder, path):
    with open(path, "w") as fh:
        fh.write("# generated by scripts/gen_fixtures.py (meters, z-up)\n")
        for v in builder.vertices:
            fh.write("v %.9g %.9g %.9g\n" % v)
        for f in builder.faces:
            fh.write("f %d %d %d\n" % (f[0] + 1, f[1] + 1, f[2] + 1))


def write_ply(builder, path):
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write("element vertex %d\n" % len(builder.vertices))
        fh.write("property float x\nproperty float y\nproperty float z\n")
        fh.write("element face %d\n" % len(builder.faces))
        fh.write("property list uchar int vertex_indices\nend_header\n")
        for v in builder.vertices:
            fh.write("%.9g %.9g %.9g\n" % v)
        for f in builder.faces:
            fh.write("3 %d %d %d\n" % f)


# ---------------------------------------------------------------------------
# cameras

def look_at(position, target):
    fwd = normalize(sub(target, position))
    up = (0.0, 0.0, 1.0)
    if abs(dot(fwd, up)) > 0.999:
        up = (0.0, 1.0, 0.0)
    x = normalize(cross(fwd, up))
    y = cross(fwd, x)
    rot = [list(x), list(y), list(fwd)]
    t = [-dot(x, position), -dot(y, position), -dot(fwd, position)]
    return rot, t


def write_camera(path, rot, t):
    cam = {"fx": FX, "fy": FY, "cx": CX, "cy": CY,
           "width": IMG_W, "height": IMG_H,
           "pose": {"rotation": rot, "translation": t}}
    with open(path, "w") as fh:
        json.dump(cam, fh, indent=2)
        fh.write("\n")


def project(rot, t, p):
    pc = [rot[i][0] * p[0] + rot[i][1] * p[1] + rot[i][2] * p[2] + t[i] for i in range(3)]
    if pc[2] <= 1e-6:
        return None
    return (FX * pc[0] / pc[2] + CX, FY * pc[1] / pc[2] + CY, pc[2])


# ---------------------------------------------------------------------------
# scenes

PART_COLORS = {
    "body": (120, 140, 180), "handle": (235, 160, 80), "spout": (200, 90, 90),
    "cone": (210, 170, 110), "scoop": (245, 230, 215), "torso": (150, 120, 170),
    "head": (230, 200, 180), "pot": (190, 110, 80), "foliage": (100, 170, 100),
    "cube": (140, 160, 150), "plate_a": (170, 170, 200), "plate_b": (200, 170, 170),
}


def render(builder, rot, t, path):
    img = Image.new("RGB", (IMG_W, IMG_H), (236, 236, 236))
    drw = ImageDraw.Draw(img)
    order = []
    for f in range(len(builder.faces)):
        pts = [project(rot, t, builder.vertices[i]) for i in builder.faces[f]]
        if any(p is None for p in pts):
            continue
        depth = sum(p[2] for p in pts) / 3.0
        order.append((depth, f, pts))
    order.sort(key=lambda e: -e[0])
    for _, f, pts in order:
        color = PART_COLORS.get(builder.face_part[f], (128, 128, 128))
        drw.polygon([(p[0], p[1]) for p in pts], fill=color)
    img.save(path)


def part_box(builder, rot, t, part, pad=4.0):
    xs, ys = [], []
    for v in builder.part_vertices(part):
        p = project(rot, t, v)
        if p is not None:
            xs.append(p[0])
            ys.append(p[1])
    x0 = max(0.0, min(xs) - pad)
    y0 = max(0.0, min(ys) - pad)
    x1 = min(float(IMG_W), max(xs) + pad)
    y1 = min(float(IMG_H), max(ys) + pad)
    return (round(x0, 1), round(y0, 1), round(x1, 1), round(y1, 1))


def build_scenes():
    scenes = {}

    b = MeshBuilder()
    # shared-vertex unit cube: 8 vertices, 12 faces
    cube_verts = [(sx * 0.5, sy * 0.5, sz * 0.5)
                  for sz in (-1, 1) for sy in (-1, 1) for sx in (-1, 1)]
    cube_faces = [(0, 2, 1), (1, 2, 3), (4, 5, 6), (5, 7, 6),
                  (0, 1, 4), (1, 5, 4), (2, 6, 3), (3, 6, 7),
                  (0, 4, 2), (2, 4, 6), (1, 3, 5), (3, 7, 5)]
    b.add_piece(cube_verts, cube_faces, "cube", lambda p: p)
    scenes["cube"] = (b, (0.0, 0.0, 2.5), (0.0, 0.0, 0.0), [])

    b = MeshBuilder()
    # zero-thickness jaw test plates, 0.06 m apart, outward normals +/-z
    pa = [(-0.04, -0.04, -0.03), (0.04, -0.04, -0.03), (0.04, 0.04, -0.03), (-0.04, 0.04, -0.03)]
    pb = [(p[0], p[1], 0.03) for p in pa]
    b.add_piece(pa, [(0, 1, 2), (0, 2, 3)], "plate_a", lambda p: (0, 0, -1))
    b.add_piece(pb, [(0, 1, 2), (0, 2, 3)], "plate_b", lambda p: (0, 0, 1))
    scenes["plates"] = (b, (0.0, -0.4, 0.0), (0.0, 0.0, 0.0), [])

    b = MeshBuilder()
    cylinder(b, "body", 0.04, 0.0, 0.10, n=28, cap_bottom=True)
    torus_arc(b, "handle", 0.025, 0.008, (0.041, 0.0, 0.05), -0.5 * math.pi, 0.5 * math.pi)
    scenes["mug"] = (b, (0.0, -0.42, 0.09), (0.0, 0.0, 0.05), ["handle", "body"])

    b = MeshBuilder()
    sphere(b, "body", 0.05, (0.0, 0.0, 0.06), n_lat=14, n_lon=20)
    cone(b, "spout", (0.10, 0.0, 0.115), (0.033, 0.0, 0.065), 0.014, n=14)
    torus_arc(b, "handle", 0.028, 0.007, (-0.048, 0.0, 0.06), 0.5 * math.pi, 1.5 * math.pi)
    scenes["teapot"] = (b, (0.0, -0.45, 0.10), (0.0, 0.0, 0.06), ["spout", "handle", "body"])

    b = MeshBuilder()
    # slim cone: the wall-to-wall normal spread (2x half-angle ~ 21 deg) must
    # stay inside the mu=0.5 friction cone (2*atan(0.5) ~ 53 deg pairwise)
    cone(b, "cone", (0.0, 0.0, -0.13), (0.0, 0.0, 0.0), 0.024, n=22)
    sphere(b, "scoop", 0.035, (0.0, 0.0, 0.012), n_lat=12, n_lon=16)
    scenes["ice_cream"] = (b, (0.0, -0.40, -0.04), (0.0, 0.0, -0.05), ["cone", "scoop"])

    b = MeshBuilder()
    cylinder(b, "torso", 0.030, 0.0, 0.09, n=20, cap_bottom=True, cap_top=True)
    sphere(b, "head", 0.025, (0.0, 0.0, 0.115), n_lat=10, n_lon=14)
    scenes["doll"] = (b, (0.0, -0.42, 0.10), (0.0, 0.0, 0.07), ["torso", "head"])

    b = MeshBuilder()
    cylinder(b, "pot", 0.05, 0.0, 0.08, n=26, cap_bottom=True)
    sphere(b, "foliage", 0.06, (0.0, 0.0, 0.16), n_lat=12, n_lon=16)
    scenes["plant"] = (b, (0.0, -0.48, 0.12), (0.0, 0.0, 0.08), ["pot", "foliage"])

    return scenes


# ---------------------------------------------------------------------------
# data tables

SURVEY = [
    ("doll", "torso", "head", 92.1),
    ("ice cream", "cone", "scoop", 100.0),
    ("candle", "base", "wick", 93.1),
    ("flowers in the vase", "vase", "flowers", 93.2),
    ("bag", "handle", "body", 91.1),
    ("plant", "pot", "leaves", 94.3),
    ("hand brush", "handle", "bristles", 95.4),
    ("toilet brush", "handle", "bristles", 97.6),
    ("cactus", "pot", "stem", 98.8),
    ("cupcake", "wrapper", "frosting", 100.0),
    ("cup on a saucer", "saucer", "cup", 81.2),
    ("plate of cake", "plate", "cake", 98.8),
    ("mug", "handle", "rim", 77.1),
    ("saucepan", "handle", "body", 94.3),
    ("broom", "handle", "bristles", 97.6),
]

REFERENCE = {  # published similarity scores per object: (graspit, graspgpt)
    "doll": (0.28, 0.48), "ice cream": (0.05, 0.40), "candle": (0.22, 0.57),
    "flowers in the vase": (0.32, 0.73), "bag": (0.79, 0.69), "plant": (0.16, 0.56),
    "hand brush": (0.65, 0.95), "toilet brush": (0.42, 0.52), "cactus": (0.26, 0.99),
    "cupcake": (0.10, 0.40), "cup on a saucer": (0.24, 0.59), "plate of cake": (0.11, 0.51),
    "mug": (0.28, 0.73), "saucepan": (0.36, 0.94), "broom": (0.42, 0.98),
}

AVOID = [
    ("keyboard", "keys"), ("tv remote", "buttons"), ("computer mouse", "buttons"),
    ("smartphone", "screen"), ("laptop", "screen"), ("teapot", "spout"),
    ("standing fan", "blades"),
]


def main():
    for sub_dir in ("meshes", "cameras", "images", "mock", "survey", "reference",
                    "grasps", "configs"):
        os.makedirs(os.path.join(FIX, sub_dir), exist_ok=True)

    scenes = build_scenes()
    vlm_rows = []
    cams = {}
    for name, (builder, cam_pos, cam_target, parts) in scenes.items():
        drop_degenerate(builder)
        write_obj(builder, os.path.join(FIX, "meshes", name + ".obj"))
        rot, t = look_at(cam_pos, cam_target)
        cams[name] = (rot, t)
        write_camera(os.path.join(FIX, "cameras", name + ".json"), rot, t)
        render(builder, rot, t, os.path.join(FIX, "images", name + ".ppm"))
        for part in parts:
            bb = part_box(builder, rot, t, part)
            vlm_rows.append((name, part, bb[0], bb[1], bb[2], bb[3], 0.9))
        print("%-10s vertices=%d faces=%d" % (name, len(builder.vertices), len(builder.faces)))
    write_ply(scenes["cube"][0], os.path.join(FIX, "meshes", "cube.ply"))

    with open(os.path.join(FIX, "mock", "vlm_boxes.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["image", "part", "x_min", "y_min", "x_max", "y_max", "confidence"])
        w.writerows(vlm_rows)

    with open(os.path.join(FIX, "mock", "llm_parts.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["object", "mode", "part"])
        for obj, part_a, _, _ in SURVEY:
            w.writerow([obj, "grasp", part_a])
        for obj, part in AVOID:
            w.writerow([obj, "avoid", part])

    with open(os.path.join(FIX, "survey", "preferences.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["object", "part_a", "part_b", "p_a", "unit"])
        for obj, a, bpart, pa in SURVEY:
            w.writerow([obj, a, bpart, pa, "percent"])

    with open(os.path.join(FIX, "reference", "baseline_scores.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["object", "method", "score"])
        for obj, (gi, gg) in REFERENCE.items():
            w.writerow([obj, "graspit", "%.2f" % gi])
            w.writerow([obj, "graspgpt", "%.2f" % gg])

    make_doll_baseline(scenes["doll"][0], cams["doll"],
                       next(r for r in vlm_rows if r[0] == "doll" and r[1] == "torso"))
    write_configs()
    print("fixtures written to", FIX)


def make_doll_baseline(builder, cam, box_row):
    """Stored 20-grasp baseline set with exactly 4 grasps whose two contact
    faces both project inside the torso box (>=10 px from the border, so the
    membership decision is unambiguous)."""
    rot, t = cam
    x0, y0, x1, y1 = box_row[2], box_row[3], box_row[4], box_row[5]
    inside, outside = [], []
    for f in range(len(builder.faces)):
        c = builder.centroid(f)
        p = project(rot, t, c)
        if p is None:
            continue
        if x0 + 10 <= p[0] <= x1 - 10 and y0 + 10 <= p[1] <= y1 - 10:
            inside.append(f)
        elif p[0] < x0 - 10 or p[0] > x1 + 10 or p[1] < y0 - 10 or p[1] > y1 + 10:
            outside.append(f)
    assert len(inside) >= 8 and len(outside) >= 32, (len(inside), len(outside))

    def grasp(idx, fa, fb):
        pa, pb = builder.centroid(fa), builder.centroid(fb)

        def face_normal(f):
            a, b, c = (builder.vertices[i] for i in builder.faces[f])
            return normalize(cross(sub(b, a), sub(c, a)))

        width = norm(sub(pa, pb))
        mid = mul(add(pa, pb), 0.5)
        pose = [1, 0, 0, mid[0], 0, 1, 0, mid[1], 0, 0, 1, mid[2], 0, 0, 0, 1]
        return {
            "pose": pose,
            "width": width,
            "contacts": [
                {"point": list(pa), "normal": list(face_normal(fa)), "face": fa},
                {"point": list(pb), "normal": list(face_normal(fb)), "face": fb},
            ],
            "quality": round(0.95 - 0.01 * idx, 6),
            "seed_id": idx,
        }

    grasps = []
    for i in range(4):
        grasps.append(grasp(i, inside[2 * i], inside[2 * i + 1]))
    for i in range(16):
        grasps.append(grasp(4 + i, outside[2 * i], outside[2 * i + 1]))
    doc = {
        "header": {
            "rng_seed": 0,
            "fixture": "doll",
            "gripper": {"max_opening": 0.5, "finger_length": 0.04,
                        "finger_box": [0.01, 0.01, 0.02],
                        "palm_clearance": 0.01, "friction_mu": 0.5},
        },
        "grasps": grasps,
    }
    with open(os.path.join(FIX, "grasps", "doll_baseline_grasps.json"), "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def write_configs():
    def cfg(scene, label, mode):
        return {
            "mesh": "../meshes/%s.obj" % scene,
            "image": "../images/%s.ppm" % scene,
            "camera": "../cameras/%s.json" % scene,
            "object_label": label,
            "mode": mode,
            "visibility": "silhouette",
            "depth_band_m": 0.02,
            "n_grasps": 20,
            "rng_seed": 42,
            "out_dir": "out",
            "backends": {
                "llm": {"kind": "mock", "fixture": "../mock/llm_parts.csv"},
                "vlm": {"kind": "mock", "fixture": "../mock/vlm_boxes.csv"},
                "timeout_s": 10.0,
                "retries": 1,
            },
        }

    plans = {
        "mug_plan.json": cfg("mug", "mug", "grasp"),
        "ice_cream_plan.json": cfg("ice_cream", "ice cream", "grasp"),
        "teapot_avoid.json": cfg("teapot", "teapot", "avoid"),
        "doll_plan.json": cfg("doll", "doll", "grasp"),
        "plant_plan.json": cfg("plant", "plant", "grasp"),
    }
    for fname, doc in plans.items():
        with open(os.path.join(FIX, "configs", fname), "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


if __name__ == "__main__":
    main()
