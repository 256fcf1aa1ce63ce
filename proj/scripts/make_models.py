#!/usr/bin/env python3
"""Generate the network description files shipped under models/.

Each encoding is derived from the public definition of the architecture.
Layer shapes are not stored; the compiler propagates them from the input
size, so the same file can be used at several resolutions.

Run from the repository root:  python3 scripts/make_models.py [--stats]
"""

import argparse
import json
import math
import os

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "models")


class Net:
    def __init__(self, name, w, h, c=3):
        self.name = name
        self.input = {"width": w, "height": h, "channels": c}
        self.layers = []

    def _add(self, **kw):
        kw["id"] = len(self.layers)
        self.layers.append(kw)
        return kw["id"]

    def conv(self, out_c, k=3, stride=1, act="relu", frm=None, bn=True):
        d = dict(kind="conv", out_channels=out_c, kernel=k, stride=stride,
                 activation=act, batchnorm=bn)
        if frm is not None:
            d["from"] = frm
        return self._add(**d)

    def dwconv(self, k=3, stride=1, act="none", frm=None):
        d = dict(kind="dwconv", kernel=k, stride=stride, activation=act,
                 batchnorm=True)
        if frm is not None:
            d["from"] = frm
        return self._add(**d)

    def maxpool(self, k=2, stride=2, frm=None):
        d = dict(kind="maxpool", kernel=k, stride=stride)
        if frm is not None:
            d["from"] = frm
        return self._add(**d)

    def gap(self, frm=None):
        d = dict(kind="avgpool_global")
        if frm is not None:
            d["from"] = frm
        return self._add(**d)

    def fc(self, out_c, act="none", frm=None):
        d = dict(kind="fc", out_channels=out_c, activation=act)
        if frm is not None:
            d["from"] = frm
        return self._add(**d)

    def eltwise(self, shortcut, frm=None):
        d = dict(kind="eltwise_add", shortcut=shortcut)
        if frm is not None:
            d["from"] = frm
        return self._add(**d)

    def concat(self, sources, frm=None):
        d = dict(kind="concat", sources=sources)
        if frm is not None:
            d["from"] = frm
        return self._add(**d)

    def upsample(self, factor=2, frm=None):
        d = dict(kind="upsample", factor=factor)
        if frm is not None:
            d["from"] = frm
        return self._add(**d)

    def activation(self, act, frm=None):
        d = dict(kind="activation", activation=act)
        if frm is not None:
            d["from"] = frm
        return self._add(**d)

    def scale(self, vector, frm=None):
        d = dict(kind="scale", vector=vector)
        if frm is not None:
            d["from"] = frm
        return self._add(**d)

    # ---- shape/size bookkeeping (independent of the C++ implementation;
    #      used to stamp declared_gop and for --stats) ----
    def shapes(self):
        w0 = self.input["width"]
        h0 = self.input["height"]
        c0 = self.input["channels"]
        out = []  # (w, h, c) per layer
        for l in self.layers:
            f = l.get("from", l["id"] - 1)
            if f < 0:
                iw, ih, ic = w0, h0, c0
            else:
                iw, ih, ic = out[f]
            k = l["kind"]
            if k == "conv":
                s = l["stride"]
                out.append((math.ceil(iw / s), math.ceil(ih / s),
                            l["out_channels"]))
            elif k == "dwconv":
                s = l["stride"]
                out.append((math.ceil(iw / s), math.ceil(ih / s), ic))
            elif k == "maxpool":
                s = l["stride"]
                out.append((math.ceil(iw / s), math.ceil(ih / s), ic))
            elif k == "avgpool_global":
                out.append((1, 1, ic))
            elif k == "fc":
                out.append((1, 1, l["out_channels"]))
            elif k in ("eltwise_add", "activation", "scale"):
                out.append((iw, ih, ic))
            elif k == "upsample":
                f2 = l["factor"]
                out.append((iw * f2, ih * f2, ic))
            elif k == "concat":
                cc = 0
                for s in l["sources"]:
                    cc += out[s][2]
                sw, sh, _ = out[l["sources"][0]]
                out.append((sw, sh, cc))
            else:
                raise ValueError(k)
        return out

    def in_shape(self, l, shapes):
        f = l.get("from", l["id"] - 1)
        if f < 0:
            return (self.input["width"], self.input["height"],
                    self.input["channels"])
        return shapes[f]

    def macs(self):
        shapes = self.shapes()
        total = 0
        for l in self.layers:
            iw, ih, ic = self.in_shape(l, shapes)
            ow, oh, oc = shapes[l["id"]]
            k = l["kind"]
            if k == "conv":
                total += l["kernel"] ** 2 * ic * oc * ow * oh
            elif k == "dwconv":
                total += l["kernel"] ** 2 * ic * ow * oh
            elif k == "fc":
                total += ic * oc
            elif k == "scale":
                total += ic * ow * oh
        return total

    def weight_bytes(self, qa=8):
        shapes = self.shapes()
        total = 0
        for l in self.layers:
            _, _, ic = self.in_shape(l, shapes)
            _, _, oc = shapes[l["id"]]
            k = l["kind"]
            if k == "conv":
                total += l["kernel"] ** 2 * ic * oc * qa // 8 + oc * 4
            elif k == "dwconv":
                total += l["kernel"] ** 2 * ic * qa // 8 + ic * 4
            elif k == "fc":
                total += ic * oc * qa // 8 + oc * 4
        return total

    def baseline_feature_bytes(self, qa=8):
        shapes = self.shapes()
        total = 0
        for l in self.layers:
            iw, ih, ic = self.in_shape(l, shapes)
            ow, oh, oc = shapes[l["id"]]
            total += (iw * ih * ic + ow * oh * oc) * qa // 8
        return total

    def finish(self):
        return {
            "name": self.name,
            "input": self.input,
            "declared_gop": round(2 * self.macs() / 1e9, 4),
            "layers": self.layers,
        }


def yolov2():
    """Darknet19-style detector, 16 conv layers, reduced head."""
    n = Net("yolov2", 416, 416)
    n.conv(32, 3, act="leaky")
    n.maxpool()
    n.conv(64, 3, act="leaky")
    n.maxpool()
    n.conv(128, 3, act="leaky")
    n.conv(64, 1, act="leaky")
    n.conv(128, 3, act="leaky")
    n.maxpool()
    n.conv(256, 3, act="leaky")
    n.conv(128, 1, act="leaky")
    n.conv(256, 3, act="leaky")
    n.maxpool()
    n.conv(512, 3, act="leaky")
    n.conv(256, 1, act="leaky")
    n.conv(512, 3, act="leaky")
    n.conv(256, 1, act="leaky")
    n.conv(512, 3, act="leaky")
    n.maxpool()
    n.conv(1024, 3, act="leaky")
    n.conv(512, 1, act="leaky")
    n.conv(1024, 3, act="leaky")
    return n


def vgg16_conv():
    n = Net("vgg16_conv", 224, 224)
    for out_c, reps in [(64, 2), (128, 2), (256, 3), (512, 3), (512, 3)]:
        for _ in range(reps):
            n.conv(out_c, 3)
        n.maxpool()
    return n


def resnet(name, block_counts, input_size=224):
    """Bottleneck ResNet, stride-2 placed on the 3x3 conv (the common
    v1.5 layout)."""
    n = Net(name, input_size, input_size)
    n.conv(64, 7, stride=2)
    n.maxpool(3, 2)
    in_id = n.layers[-1]["id"]
    width = 64
    for stage, reps in enumerate(block_counts):
        out_c = width * 4
        for b in range(reps):
            stride = 2 if (stage > 0 and b == 0) else 1
            entry = in_id
            c1 = n.conv(width, 1, frm=entry)
            c2 = n.conv(width, 3, stride=stride)
            ds = entry
            if b == 0:
                ds = n.conv(out_c, 1, stride=stride, act="none", frm=entry)
            c3 = n.conv(out_c, 1, act="none", frm=c2)
            in_id = n.eltwise(shortcut=ds, frm=c3)
        width *= 2
    n.gap()
    n.fc(1000)
    return n


def yolov3():
    n = Net("yolov3", 416, 416)

    def res(entry, half, full):
        a = n.conv(half, 1, act="leaky", frm=entry)
        b = n.conv(full, 3, act="leaky")
        return n.eltwise(shortcut=entry, frm=b)

    n.conv(32, 3, act="leaky")
    x = n.conv(64, 3, stride=2, act="leaky")
    x = res(x, 32, 64)
    x = n.conv(128, 3, stride=2, act="leaky", frm=x)
    for _ in range(2):
        x = res(x, 64, 128)
    x = n.conv(256, 3, stride=2, act="leaky", frm=x)
    for _ in range(8):
        x = res(x, 128, 256)
    c36 = x
    x = n.conv(512, 3, stride=2, act="leaky", frm=x)
    for _ in range(8):
        x = res(x, 256, 512)
    c61 = x
    x = n.conv(1024, 3, stride=2, act="leaky", frm=x)
    for _ in range(4):
        x = res(x, 512, 1024)
    # first detection head (stride 32)
    x = n.conv(512, 1, act="leaky", frm=x)
    x = n.conv(1024, 3, act="leaky")
    x = n.conv(512, 1, act="leaky")
    x = n.conv(1024, 3, act="leaky")
    b1 = n.conv(512, 1, act="leaky")
    y = n.conv(1024, 3, act="leaky", frm=b1)
    n.conv(255, 1, act="none", bn=False, frm=y)
    # second head (stride 16)
    x = n.conv(256, 1, act="leaky", frm=b1)
    x = n.upsample(2)
    x = n.concat([x, c61])
    x = n.conv(256, 1, act="leaky", frm=x)
    x = n.conv(512, 3, act="leaky")
    x = n.conv(256, 1, act="leaky")
    x = n.conv(512, 3, act="leaky")
    b2 = n.conv(256, 1, act="leaky")
    y = n.conv(512, 3, act="leaky", frm=b2)
    n.conv(255, 1, act="none", bn=False, frm=y)
    # third head (stride 8)
    x = n.conv(128, 1, act="leaky", frm=b2)
    x = n.upsample(2)
    x = n.concat([x, c36])
    x = n.conv(128, 1, act="leaky", frm=x)
    x = n.conv(256, 3, act="leaky")
    x = n.conv(128, 1, act="leaky")
    x = n.conv(256, 3, act="leaky")
    x = n.conv(128, 1, act="leaky")
    y = n.conv(256, 3, act="leaky", frm=x)
    n.conv(255, 1, act="none", bn=False, frm=y)
    return n


def retinanet():
    """ResNet50-FPN RetinaNet; class/box subnets encoded per pyramid
    level (the hardware runs each level as its own layer sequence)."""
    n = Net("retinanet", 512, 512)
    n.conv(64, 7, stride=2)
    n.maxpool(3, 2)
    in_id = n.layers[-1]["id"]
    width = 64
    stage_out = []
    for stage, reps in enumerate([3, 4, 6, 3]):
        out_c = width * 4
        for b in range(reps):
            stride = 2 if (stage > 0 and b == 0) else 1
            entry = in_id
            n.conv(width, 1, frm=entry)
            c2 = n.conv(width, 3, stride=stride)
            ds = entry
            if b == 0:
                ds = n.conv(out_c, 1, stride=stride, act="none", frm=entry)
            c3 = n.conv(out_c, 1, act="none", frm=c2)
            in_id = n.eltwise(shortcut=ds, frm=c3)
        stage_out.append(in_id)
        width *= 2
    c3_id, c4_id, c5_id = stage_out[1], stage_out[2], stage_out[3]

    def head(level):
        for _ in range(4):
            level = n.conv(256, 3, frm=level)
        n.conv(720, 3, act="none", bn=False, frm=level)  # 9 anchors x 80

    def box_head(level):
        for _ in range(4):
            level = n.conv(256, 3, frm=level)
        n.conv(36, 3, act="none", bn=False, frm=level)  # 9 anchors x 4

    # feature pyramid and per-level subnets, deepest level first so the
    # execution order walks down to the smallest scale and back up
    p5l = n.conv(256, 1, act="none", frm=c5_id)
    p5s = n.conv(256, 3, act="none", frm=p5l)
    p6 = n.conv(256, 3, stride=2, act="none", frm=c5_id)
    p6r = n.activation("relu", frm=p6)
    p7 = n.conv(256, 3, stride=2, act="none", frm=p6r)
    head(p7)
    box_head(p7)
    head(p6)
    box_head(p6)
    head(p5s)
    box_head(p5s)
    u5 = n.upsample(2, frm=p5l)
    l4 = n.conv(256, 1, act="none", frm=c4_id)
    m4 = n.eltwise(shortcut=u5, frm=l4)
    p4s = n.conv(256, 3, act="none", frm=m4)
    head(p4s)
    box_head(p4s)
    u4 = n.upsample(2, frm=m4)
    l3 = n.conv(256, 1, act="none", frm=c3_id)
    m3 = n.eltwise(shortcut=u4, frm=l3)
    p3s = n.conv(256, 3, act="none", frm=m3)
    head(p3s)
    box_head(p3s)
    return n


def efficientnet_b1():
    n = Net("efficientnet_b1", 256, 256)
    stem = n.conv(32, 3, stride=2, act="none")
    x = n.activation("swish", frm=stem)

    def mbconv(x, in_c, out_c, k, stride, expand):
        entry = x
        se_c = max(1, in_c // 4)
        if expand != 1:
            e = n.conv(in_c * expand, 1, act="none", frm=x)
            x = n.activation("swish", frm=e)
        d = n.dwconv(k, stride, act="none", frm=x)
        x = n.activation("swish", frm=d)
        g = n.gap(frm=x)
        f1 = n.fc(se_c, act="swish", frm=g)
        f2 = n.fc(in_c * expand if expand != 1 else in_c, act="sigmoid",
                  frm=f1)
        x = n.scale(vector=f2, frm=x)
        p = n.conv(out_c, 1, act="none", frm=x)
        if stride == 1 and in_c == out_c:
            return n.eltwise(shortcut=entry, frm=p)
        return p

    cfg = [  # (repeats, out_c, kernel, stride, expand)
        (2, 16, 3, 1, 1),
        (3, 24, 3, 2, 6),
        (3, 40, 5, 2, 6),
        (4, 80, 3, 2, 6),
        (4, 112, 5, 1, 6),
        (5, 192, 5, 2, 6),
        (2, 320, 3, 1, 6),
    ]
    in_c = 32
    for reps, out_c, k, stride, expand in cfg:
        for b in range(reps):
            s = stride if b == 0 else 1
            x = mbconv(x, in_c, out_c, k, s, expand)
            in_c = out_c
    h = n.conv(1280, 1, act="none", frm=x)
    x = n.activation("swish", frm=h)
    n.gap(frm=x)
    n.fc(1000)
    return n


def toy3():
    n = Net("toy3", 8, 8, 16)
    n.conv(16, 3)
    n.conv(16, 3)
    n.conv(32, 3, stride=2)
    return n


ALL = [yolov2, vgg16_conv,
       lambda: resnet("resnet50", [3, 4, 6, 3]),
       lambda: resnet("resnet152", [3, 8, 36, 3]),
       yolov3, retinanet, efficientnet_b1, toy3]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--stats", action="store_true")
    args = ap.parse_args()
    os.makedirs(OUT_DIR, exist_ok=True)
    for make in ALL:
        net = make()
        doc = net.finish()
        path = os.path.join(OUT_DIR, net.name + ".json")
        with open(path, "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")
        if args.stats:
            mb = 1024.0 * 1024.0
            print(f"{net.name:18s} layers={len(net.layers):4d} "
                  f"gop={doc['declared_gop']:8.3f} "
                  f"weights={net.weight_bytes() / mb:8.2f}MB "
                  f"baseline_fm={net.baseline_feature_bytes() / mb:8.2f}MB")
        else:
            print("wrote", path)


if __name__ == "__main__":
    main()
