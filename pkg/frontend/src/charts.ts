// Dependency-free SVG charts for the analytics panel.

import type { DemandHistory, InventoryPoint } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const WIDTH = 560;
const HEIGHT = 200;
const PAD = 28;

interface Point {
  x: number;
  y: number;
}

function svgElement(tag: string, attrs: Record<string, string | number>): SVGElement {
  const el = document.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

function scales(points: Point[]) {
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(0, ...ys);
  const yMax = Math.max(1, ...ys);
  const sx = (x: number) =>
    PAD + ((x - xMin) / Math.max(xMax - xMin, 1)) * (WIDTH - 2 * PAD);
  const sy = (y: number) =>
    HEIGHT - PAD - ((y - yMin) / Math.max(yMax - yMin, 1)) * (HEIGHT - 2 * PAD);
  return { sx, sy, yMax };
}

function polyline(points: Point[], sx: (x: number) => number,
                  sy: (y: number) => number, color: string,
                  dashed = false): SVGElement {
  const line = svgElement('polyline', {
    points: points.map((p) => `${sx(p.x)},${sy(p.y)}`).join(' '),
    fill: 'none',
    stroke: color,
    'stroke-width': 2,
  });
  if (dashed) line.setAttribute('stroke-dasharray', '4 3');
  return line;
}

function markers(points: Point[], sx: (x: number) => number,
                 sy: (y: number) => number, color: string,
                 testId: string): SVGElement[] {
  return points.map((p) => {
    const dot = svgElement('circle', {
      cx: sx(p.x), cy: sy(p.y), r: 2.5, fill: color,
    });
    dot.setAttribute('data-testid', testId);
    return dot;
  });
}

/** Demand line chart: the five seeded samples (periods -4..0, dashed) plus
 * every realized demand. One dot per demand point. */
export function demandChart(history: DemandHistory): SVGElement {
  const seed: Point[] = history.seed.map((y, i) => ({ x: i - 4, y }));
  const realized: Point[] = history.realized.map((y, i) => ({ x: i + 1, y }));
  const all = [...seed, ...realized];
  const { sx, sy } = scales(all);
  const svg = svgElement('svg', {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`, width: WIDTH, height: HEIGHT,
  });
  svg.setAttribute('data-testid', 'demand-chart');
  svg.appendChild(svgElement('line', {
    x1: PAD, y1: HEIGHT - PAD, x2: WIDTH - PAD, y2: HEIGHT - PAD,
    stroke: '#999', 'stroke-width': 1,
  }));
  svg.appendChild(polyline(seed, sx, sy, '#888', true));
  if (realized.length > 0) {
    const bridge = [seed[seed.length - 1], ...realized];
    svg.appendChild(polyline(bridge, sx, sy, '#1669c1'));
  }
  for (const dot of markers(all, sx, sy, '#1669c1', 'demand-point')) {
    svg.appendChild(dot);
  }
  return svg;
}

/** Inventory status chart: ending inventory per played period, with arrival
 * markers. */
export function inventoryChart(points: InventoryPoint[]): SVGElement {
  const svg = svgElement('svg', {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`, width: WIDTH, height: HEIGHT,
  });
  svg.setAttribute('data-testid', 'inventory-chart');
  svg.appendChild(svgElement('line', {
    x1: PAD, y1: HEIGHT - PAD, x2: WIDTH - PAD, y2: HEIGHT - PAD,
    stroke: '#999', 'stroke-width': 1,
  }));
  if (points.length === 0) return svg;
  const ending: Point[] = points.map((p) => ({ x: p.period, y: p.ending_inventory }));
  const { sx, sy } = scales(ending);
  const barWidth = Math.max(2, (WIDTH - 2 * PAD) / Math.max(points.length, 1) - 3);
  for (const p of points) {
    const bar = svgElement('rect', {
      x: sx(p.period) - barWidth / 2,
      y: sy(p.ending_inventory),
      width: barWidth,
      height: Math.max(HEIGHT - PAD - sy(p.ending_inventory), 0),
      fill: '#67a061',
    });
    bar.setAttribute('data-testid', 'inventory-bar');
    svg.appendChild(bar);
    if (p.arrivals > 0) {
      const mark = svgElement('circle', {
        cx: sx(p.period), cy: sy(p.arrivals), r: 3, fill: '#d2722f',
      });
      mark.setAttribute('data-testid', 'arrival-marker');
      svg.appendChild(mark);
    }
  }
  return svg;
}
