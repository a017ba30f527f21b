/** One zoom/pan state shared by all five image panes.
 *
 * Every pane renders the same transform, so what the annotator sees is
 * pixel-for-pixel comparable. Magnification stays nearest-neighbor
 * (CSS image-rendering: pixelated) so the client adds no smoothing of
 * its own.
 */

export interface ViewportState {
  scale: number;
  /** Pan offset in displayed pixels. */
  x: number;
  y: number;
}

export const MIN_SCALE = 1;
export const MAX_SCALE = 32;

export class SharedViewport {
  private state: ViewportState = { scale: 1, x: 0, y: 0 };
  private readonly listeners = new Set<(s: ViewportState) => void>();

  get current(): ViewportState {
    return { ...this.state };
  }

  subscribe(listener: (s: ViewportState) => void): () => void {
    this.listeners.add(listener);
    listener(this.current);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.current);
    }
  }

  /** Zoom by `factor` keeping the pane point (px, py) stationary. */
  zoomAt(px: number, py: number, factor: number): void {
    const next = Math.min(MAX_SCALE, Math.max(MIN_SCALE, this.state.scale * factor));
    const applied = next / this.state.scale;
    this.state = {
      scale: next,
      x: px - applied * (px - this.state.x),
      y: py - applied * (py - this.state.y),
    };
    this.emit();
  }

  panBy(dx: number, dy: number): void {
    this.state = { ...this.state, x: this.state.x + dx, y: this.state.y + dy };
    this.emit();
  }

  reset(): void {
    this.state = { scale: 1, x: 0, y: 0 };
    this.emit();
  }

  /** CSS transform applied identically to every pane's image. */
  cssTransform(): string {
    const { scale, x, y } = this.state;
    return `translate(${x}px, ${y}px) scale(${scale})`;
  }
}
