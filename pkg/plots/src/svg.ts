// Tiny deterministic SVG writer. Attributes are emitted in the order they
// are given and every coordinate is formatted with a fixed precision, so
// identical inputs always produce byte-identical files.

export function fm(x: number): string {
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export type Attrs = Record<string, string | number>;

function attrText(attrs: Attrs): string {
  const parts: string[] = [];
  for (const [k, v] of Object.entries(attrs)) {
    parts.push(`${k}="${typeof v === "number" ? fm(v) : v}"`);
  }
  return parts.join(" ");
}

function escape(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export class Svg {
  readonly width: number;
  readonly height: number;
  private parts: string[] = [];

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
  }

  el(tag: string, attrs: Attrs): void {
    this.parts.push(`<${tag} ${attrText(attrs)}/>`);
  }

  rect(x: number, y: number, w: number, h: number, attrs: Attrs): void {
    this.el("rect", { x, y, width: w, height: h, ...attrs });
  }

  circle(cx: number, cy: number, r: number, attrs: Attrs): void {
    this.el("circle", { cx, cy, r, ...attrs });
  }

  line(x1: number, y1: number, x2: number, y2: number, attrs: Attrs): void {
    this.el("line", { x1, y1, x2, y2, ...attrs });
  }

  poly(points: [number, number][], attrs: Attrs, close = false): void {
    if (points.length === 0) return;
    let d = `M${fm(points[0][0])} ${fm(points[0][1])}`;
    for (let i = 1; i < points.length; i++) {
      d += `L${fm(points[i][0])} ${fm(points[i][1])}`;
    }
    if (close) d += "Z";
    this.el("path", { d, ...attrs });
  }

  text(x: number, y: number, s: string, attrs: Attrs = {}): void {
    this.parts.push(
      `<text ${attrText({ x, y, ...attrs })}>${escape(s)}</text>`,
    );
  }

  toString(): string {
    const head =
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}" ` +
      `font-family="Menlo, Consolas, monospace">\n`;
    return head + this.parts.join("\n") + "\n</svg>\n";
  }
}
